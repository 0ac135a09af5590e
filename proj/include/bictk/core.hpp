#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace bictk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Json = nlohmann::json;
using IndexList = std::vector<std::size_t>;

namespace detail {

inline void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::unordered_set<std::string> seen;
  seen.reserve(ids.size());
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw ValidationError(std::string("duplicate ") + what + " label '" + id + "'");
    }
  }
}

}  // namespace detail

// Labeled real matrix (genes x conditions) with a missing-value mask.
// Immutable once constructed; missing cells hold NaN in values().
class ExpressionMatrix {
 public:
  ExpressionMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                   Matrix values, MissingMask missing = {})
      : row_ids_(std::move(row_ids)),
        col_ids_(std::move(col_ids)),
        values_(std::move(values)),
        missing_(std::move(missing)) {
    if (row_ids_.empty() || col_ids_.empty()) {
      throw ValidationError("matrix must have at least one row and one column");
    }
    if (static_cast<std::size_t>(values_.rows()) != row_ids_.size() ||
        static_cast<std::size_t>(values_.cols()) != col_ids_.size()) {
      throw ValidationError("value dimensions do not match label counts");
    }
    detail::require_unique(row_ids_, "row");
    detail::require_unique(col_ids_, "column");
    if (missing_.size() == 0) {
      missing_ = MissingMask::Constant(values_.rows(), values_.cols(), false);
    } else if (missing_.rows() != values_.rows() || missing_.cols() != values_.cols()) {
      throw ValidationError("missing mask dimensions do not match values");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        if (missing_(i, j)) {
          values_(i, j) = std::numeric_limits<double>::quiet_NaN();
        } else if (!std::isfinite(values_(i, j))) {
          throw ValidationError("non-finite value at row '" + row_ids_[i] + "', column '" +
                                col_ids_[j] + "'");
        }
      }
    }
  }

  // Unlabeled convenience constructor: rows g0.., columns c0..
  static ExpressionMatrix from_values(Matrix values) {
    std::vector<std::string> r(static_cast<std::size_t>(values.rows()));
    std::vector<std::string> c(static_cast<std::size_t>(values.cols()));
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = "g" + std::to_string(i);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = "c" + std::to_string(j);
    return ExpressionMatrix(std::move(r), std::move(c), std::move(values));
  }

  std::size_t rows() const { return row_ids_.size(); }
  std::size_t cols() const { return col_ids_.size(); }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }
  const Matrix& values() const { return values_; }
  const MissingMask& missing() const { return missing_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::size_t missing_count() const { return static_cast<std::size_t>(missing_.count()); }
  bool complete() const { return missing_count() == 0; }

  // Algorithms only accept filtered (complete) matrices.
  void require_complete() const {
    if (!complete()) {
      throw DomainError(std::to_string(missing_count()) +
                        " missing values present; run the filter preprocessing step first");
    }
  }

  // Same labels, new values (missing mask cleared).
  ExpressionMatrix with_values(Matrix values) const {
    return ExpressionMatrix(row_ids_, col_ids_, std::move(values));
  }

  friend bool operator==(const ExpressionMatrix& a, const ExpressionMatrix& b) {
    if (a.row_ids_ != b.row_ids_ || a.col_ids_ != b.col_ids_) return false;
    if ((a.missing_ != b.missing_).any()) return false;
    for (Eigen::Index i = 0; i < a.values_.rows(); ++i)
      for (Eigen::Index j = 0; j < a.values_.cols(); ++j)
        if (!a.missing_(i, j) && a.values_(i, j) != b.values_(i, j)) return false;
    return true;
  }

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
  Matrix values_;
  MissingMask missing_;
};

struct Bicluster {
  IndexList rows;
  IndexList cols;
  std::optional<double> score;

  std::size_t cell_count() const { return rows.size() * cols.size(); }

  friend bool operator==(const Bicluster& a, const Bicluster& b) {
    return a.rows == b.rows && a.cols == b.cols && a.score == b.score;
  }
};

// Sorts and de-duplicates the index lists.
inline Bicluster make_bicluster(IndexList rows, IndexList cols,
                                std::optional<double> score = std::nullopt) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  return Bicluster{std::move(rows), std::move(cols), score};
}

inline void validate_bicluster(const Bicluster& b, std::size_t n_rows, std::size_t n_cols) {
  auto check = [](const IndexList& idx, std::size_t bound, const char* what) {
    if (idx.empty()) throw ValidationError(std::string("bicluster has no ") + what);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] >= bound) {
        throw ValidationError(std::string("bicluster ") + what + " index " +
                              std::to_string(idx[k]) + " out of bounds (" +
                              std::to_string(bound) + ")");
      }
      if (k > 0 && idx[k] <= idx[k - 1]) {
        throw ValidationError(std::string("bicluster ") + what +
                              " indices must be strictly increasing");
      }
    }
  };
  check(b.rows, n_rows, "rows");
  check(b.cols, n_cols, "cols");
}

inline void validate_bicluster(const Bicluster& b, const ExpressionMatrix& m) {
  validate_bicluster(b, m.rows(), m.cols());
}

inline Bicluster full_bicluster(std::size_t n_rows, std::size_t n_cols) {
  Bicluster b;
  b.rows.resize(n_rows);
  b.cols.resize(n_cols);
  for (std::size_t i = 0; i < n_rows; ++i) b.rows[i] = i;
  for (std::size_t j = 0; j < n_cols; ++j) b.cols[j] = j;
  return b;
}

struct BiclusterSet {
  std::string algorithm;
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::vector<Bicluster> biclusters;

  std::size_t size() const { return biclusters.size(); }

  friend bool operator==(const BiclusterSet& a, const BiclusterSet& b) {
    return a.algorithm == b.algorithm && a.params == b.params && a.seed == b.seed &&
           a.biclusters == b.biclusters;
  }
};

inline void validate_set(const BiclusterSet& s, const ExpressionMatrix& m) {
  for (const auto& b : s.biclusters) validate_bicluster(b, m);
}

inline Matrix extract_submatrix(const Matrix& values, const Bicluster& b) {
  validate_bicluster(b, static_cast<std::size_t>(values.rows()),
                     static_cast<std::size_t>(values.cols()));
  Matrix out(b.rows.size(), b.cols.size());
  for (std::size_t p = 0; p < b.rows.size(); ++p)
    for (std::size_t q = 0; q < b.cols.size(); ++q)
      out(p, q) = values(b.rows[p], b.cols[q]);
  return out;
}

inline Matrix extract_submatrix(const ExpressionMatrix& m, const Bicluster& b) {
  return extract_submatrix(m.values(), b);
}

// ---------------------------------------------------------------------------
// Run bookkeeping shared by the CLI and the service.

enum class RunStatus { queued, running, done, failed };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::queued: return "queued";
    case RunStatus::running: return "running";
    case RunStatus::done: return "done";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

inline RunStatus run_status_from_string(const std::string& s) {
  if (s == "queued") return RunStatus::queued;
  if (s == "running") return RunStatus::running;
  if (s == "done") return RunStatus::done;
  if (s == "failed") return RunStatus::failed;
  throw ParseError("unknown run status '" + s + "'");
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunDescriptor {
  std::string dataset;
  std::string algorithm;
  Json params = Json::object();
  std::uint64_t seed = 42;
  RunStatus status = RunStatus::queued;
  std::string created_at = utc_timestamp();
  std::string started_at;
  std::string finished_at;

  // Only queued -> running -> {done, failed} is legal.
  void advance(RunStatus next) {
    const bool ok = (status == RunStatus::queued && next == RunStatus::running) ||
                    (status == RunStatus::running &&
                     (next == RunStatus::done || next == RunStatus::failed));
    if (!ok) {
      throw ValidationError(std::string("illegal run status transition ") +
                            to_string(status) + " -> " + to_string(next));
    }
    status = next;
    if (next == RunStatus::running) {
      started_at = utc_timestamp();
    } else {
      finished_at = utc_timestamp();
    }
  }
};

inline Json to_json(const RunDescriptor& d) {
  return Json{{"dataset", d.dataset},       {"algorithm", d.algorithm},
              {"params", d.params},         {"seed", d.seed},
              {"status", to_string(d.status)}, {"created_at", d.created_at},
              {"started_at", d.started_at}, {"finished_at", d.finished_at}};
}

inline RunDescriptor run_descriptor_from_json(const Json& j) {
  RunDescriptor d;
  d.dataset = j.at("dataset").get<std::string>();
  d.algorithm = j.at("algorithm").get<std::string>();
  d.params = j.value("params", Json::object());
  d.seed = j.at("seed").get<std::uint64_t>();
  d.status = run_status_from_string(j.at("status").get<std::string>());
  d.created_at = j.value("created_at", "");
  d.started_at = j.value("started_at", "");
  d.finished_at = j.value("finished_at", "");
  return d;
}

}  // namespace bictk
