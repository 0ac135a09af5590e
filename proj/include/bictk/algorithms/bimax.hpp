#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct BimaxParams {
  long long min_rows = 2;
  long long min_cols = 2;
  std::string mode = "recursive";
  long long max_biclusters = 100;

  static const Schema& schema() {
    static const Schema s = {
        int_param("min_rows", 2, 1, "minimum rows per bicluster"),
        int_param("min_cols", 2, 1, "minimum columns per bicluster"),
        choice_param("mode", "recursive", {"recursive", "iterative"},
                     "divide and conquer, or stack-based enumeration"),
        int_param("max_biclusters", 100, 1, "maximum number of biclusters returned"),
    };
    return s;
  }
  Json to_json() const {
    return {{"min_rows", min_rows},
            {"min_cols", min_cols},
            {"mode", mode},
            {"max_biclusters", max_biclusters}};
  }
  static BimaxParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "bimax");
    return {r["min_rows"].get<long long>(), r["min_cols"].get<long long>(),
            r["mode"].get<std::string>(), r["max_biclusters"].get<long long>()};
  }
};

namespace detail {

class BinaryMatrix {
 public:
  explicit BinaryMatrix(const Matrix& a)
      : n_(static_cast<std::size_t>(a.rows())), m_(static_cast<std::size_t>(a.cols())),
        bits_(n_ * m_) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) bits_[i * m_ + j] = a(i, j) != 0.0;
  }
  bool operator()(std::size_t i, std::size_t j) const { return bits_[i * m_ + j]; }
  std::size_t rows() const { return n_; }
  std::size_t cols() const { return m_; }

  IndexList common_cols(const IndexList& rows) const {
    IndexList out;
    for (std::size_t j = 0; j < m_; ++j)
      if (std::all_of(rows.begin(), rows.end(), [&](std::size_t i) { return (*this)(i, j); }))
        out.push_back(j);
    return out;
  }
  IndexList common_rows(const IndexList& cols) const {
    IndexList out;
    for (std::size_t i = 0; i < n_; ++i)
      if (std::all_of(cols.begin(), cols.end(), [&](std::size_t j) { return (*this)(i, j); }))
        out.push_back(i);
    return out;
  }

 private:
  std::size_t n_, m_;
  std::vector<char> bits_;
};

inline bool is_maximal(const BinaryMatrix& e, const Bicluster& b) {
  return e.common_rows(b.cols) == b.rows && e.common_cols(b.rows) == b.cols;
}

// Divide and conquer over the binary matrix. `mandatory` holds column sets
// every reported bicluster must intersect, which keeps the two halves of a
// split from reporting the same bicluster.
class BimaxConquer {
 public:
  BimaxConquer(const BinaryMatrix& e, std::size_t min_rows, std::size_t min_cols)
      : e_(e), min_rows_(min_rows), min_cols_(min_cols) {}

  std::vector<Bicluster> run() {
    IndexList rows(e_.rows()), cols(e_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    conquer(rows, cols, {});
    return std::move(out_);
  }

 private:
  bool has_one(std::size_t i, const IndexList& cols) const {
    return std::any_of(cols.begin(), cols.end(), [&](std::size_t j) { return e_(i, j); });
  }

  void conquer(const IndexList& u_in, const IndexList& v, std::vector<IndexList> mandatory) {
    if (v.size() < min_cols_) return;
    for (auto& z : mandatory) {
      IndexList keep;
      std::set_intersection(z.begin(), z.end(), v.begin(), v.end(), std::back_inserter(keep));
      if (keep.empty()) return;
      z = std::move(keep);
    }
    IndexList u;
    for (auto i : u_in) {
      if (!has_one(i, v)) continue;
      const bool ok = std::all_of(mandatory.begin(), mandatory.end(),
                                  [&](const IndexList& z) { return has_one(i, z); });
      if (ok) u.push_back(i);
    }
    if (u.size() < min_rows_) return;

    const auto zero_row = std::find_if(u.begin(), u.end(), [&](std::size_t i) {
      return std::any_of(v.begin(), v.end(), [&](std::size_t j) { return !e_(i, j); });
    });
    if (zero_row == u.end()) {
      Bicluster b{u, v, {}};
      if (is_maximal(e_, b)) out_.push_back(std::move(b));
      return;
    }
    IndexList cu, cv;
    for (auto j : v) (e_(*zero_row, j) ? cu : cv).push_back(j);
    IndexList left, right;
    for (auto i : u) {
      const bool in_cu = has_one(i, cu), in_cv = has_one(i, cv);
      if (in_cu) left.push_back(i);
      if (in_cv) right.push_back(i);
    }
    conquer(left, cu, mandatory);
    mandatory.push_back(cv);
    conquer(right, v, std::move(mandatory));
  }

  const BinaryMatrix& e_;
  std::size_t min_rows_, min_cols_;
  std::vector<Bicluster> out_;
};

// Closed column sets enumerated with an explicit stack (no recursion).
inline std::vector<Bicluster> bimax_iterative(const BinaryMatrix& e, std::size_t min_rows,
                                              std::size_t min_cols) {
  struct Frame {
    IndexList rows, cols;
    std::size_t next;
  };
  std::vector<Bicluster> out;
  IndexList all(e.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<Frame> stack{{all, e.common_cols(all), 0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (!f.rows.empty() && f.rows.size() >= min_rows && f.cols.size() >= min_cols)
      out.push_back(Bicluster{f.rows, f.cols, {}});
    for (std::size_t j = e.cols(); j-- > f.next;) {
      if (std::binary_search(f.cols.begin(), f.cols.end(), j)) continue;
      IndexList rows;
      for (auto i : f.rows)
        if (e(i, j)) rows.push_back(i);
      if (rows.size() < min_rows || rows.empty()) continue;
      IndexList cols = e.common_cols(rows);
      // Canonical test: the closure adds no column before j that was absent.
      bool canonical = true;
      for (auto c : cols) {
        if (c >= j) break;
        if (!std::binary_search(f.cols.begin(), f.cols.end(), c)) {
          canonical = false;
          break;
        }
      }
      if (canonical) stack.push_back({std::move(rows), std::move(cols), j + 1});
    }
  }
  return out;
}

inline void order_by_area(std::vector<Bicluster>& bs) {
  std::sort(bs.begin(), bs.end(), [](const Bicluster& x, const Bicluster& y) {
    if (x.cell_count() != y.cell_count()) return x.cell_count() > y.cell_count();
    if (x.rows != y.rows) return x.rows < y.rows;
    return x.cols < y.cols;
  });
}

}  // namespace detail

inline void require_binary(const Matrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (a(k) != 0.0 && a(k) != 1.0)
      throw DomainError("bimax requires a binary 0/1 matrix; run the binarize step first");
}

// Every inclusion-maximal all-ones submatrix with at least min_rows rows and
// min_cols columns, largest area first.
inline BiclusterSet run_bimax(const ExpressionMatrix& m, const BimaxParams& params,
                              std::uint64_t seed) {
  const BimaxParams p = BimaxParams::from_json(params.to_json());
  m.require_complete();
  require_binary(m.values());
  const detail::BinaryMatrix e(m.values());
  const auto min_rows = static_cast<std::size_t>(p.min_rows);
  const auto min_cols = static_cast<std::size_t>(p.min_cols);
  std::vector<Bicluster> out = p.mode == "recursive"
                                   ? detail::BimaxConquer(e, min_rows, min_cols).run()
                                   : detail::bimax_iterative(e, min_rows, min_cols);
  detail::order_by_area(out);
  if (out.size() > static_cast<std::size_t>(p.max_biclusters))
    out.resize(static_cast<std::size_t>(p.max_biclusters));
  return make_set("bimax", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
