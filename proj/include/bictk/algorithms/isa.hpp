#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct IsaParams {
  double t_g = 2.0;
  double t_c = 2.0;
  long long n_seeds = 100;
  long long max_iter = 50;

  static const Schema& schema() {
    static const Schema s = {
        real_param("t_g", 2.0, 0.0, true, "row threshold in standard deviations"),
        real_param("t_c", 2.0, 0.0, true, "column threshold in standard deviations"),
        int_param("n_seeds", 100, 1, "number of random row seeds"),
        int_param("max_iter", 50, 1, "iterations allowed to reach a fixed point"),
    };
    return s;
  }
  Json to_json() const {
    return {{"t_g", t_g}, {"t_c", t_c}, {"n_seeds", n_seeds}, {"max_iter", max_iter}};
  }
  static IsaParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "isa");
    return {r["t_g"].get<double>(), r["t_c"].get<double>(), r["n_seeds"].get<long long>(),
            r["max_iter"].get<long long>()};
  }
};

namespace detail {

inline Matrix standardize_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double sd = std::sqrt((x.row(i).array() - mu).square().mean());
    if (sd > 0) {
      out.row(i) = (x.row(i).array() - mu) / sd;
    } else {
      out.row(i).setZero();
    }
  }
  return out;
}

// Keeps entries more than t standard deviations away from the median of the
// score vector, zeroes the rest.
inline Vector threshold_scores(const Vector& s, double t) {
  std::vector<double> sorted(s.data(), s.data() + s.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  const double med = k % 2 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
  const double mu = s.mean();
  const double sd = std::sqrt((s.array() - mu).square().mean());
  Vector out = Vector::Zero(s.size());
  if (!(sd > 0)) return out;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (std::abs(s(i) - med) > t * sd) out(i) = s(i);
  return out;
}

inline IndexList support_of(const Vector& v) {
  IndexList out;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) != 0.0) out.push_back(static_cast<std::size_t>(i));
  return out;
}

}  // namespace detail

// Iterative signature algorithm. Each seed is a random set of rows; the
// signature iteration scores columns on the row-standardized matrix, keeps
// the outliers, scores rows on the column-standardized matrix, keeps the
// outliers, and repeats until the selected rows and columns stop changing.
inline BiclusterSet run_isa(const ExpressionMatrix& m, const IsaParams& params,
                            std::uint64_t seed) {
  const IsaParams p = IsaParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  const std::size_t n = m.rows();
  const Matrix eg = detail::standardize_rows(a);
  const Matrix ec = detail::standardize_rows(a.transpose()).transpose();
  Rng rng(seed);
  const std::size_t seed_size = std::max<std::size_t>(2, (n + 9) / 10);

  std::vector<Bicluster> found;
  for (long long s = 0; s < p.n_seeds; ++s) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(n));
    for (auto i : rng.sample(n, std::min(seed_size, n))) g(static_cast<Eigen::Index>(i)) = 1.0;
    IndexList rows = detail::support_of(g), cols;
    bool fixed = false;
    for (long long it = 0; it < p.max_iter; ++it) {
      const Vector c = detail::threshold_scores(eg.transpose() * g, p.t_c);
      const Vector next_g = detail::threshold_scores(ec * c, p.t_g);
      IndexList next_rows = detail::support_of(next_g), next_cols = detail::support_of(c);
      if (next_rows.empty() || next_cols.empty()) break;
      if (next_rows == rows && next_cols == cols) {
        fixed = true;
        break;
      }
      rows = std::move(next_rows);
      cols = std::move(next_cols);
      g = next_g;
    }
    if (fixed && rows.size() >= 2 && cols.size() >= 2) found.push_back(Bicluster{rows, cols, {}});
  }
  return make_set("isa", p.to_json(), seed, dedup_by_jaccard(std::move(found), 0.9));
}

}  // namespace bictk::algo
