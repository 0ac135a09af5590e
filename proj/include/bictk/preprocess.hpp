#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace bictk::preprocess {

// Result of a preprocessing step: the new matrix plus non-fatal diagnostics.
struct Outcome {
  ExpressionMatrix matrix;
  std::vector<std::string> warnings;
};

enum class Impute { row_mean, col_mean, none };

inline Impute impute_from_string(const std::string& s) {
  if (s == "row_mean") return Impute::row_mean;
  if (s == "col_mean") return Impute::col_mean;
  if (s == "none") return Impute::none;
  throw ParameterError("impute must be row_mean, col_mean or none (got '" + s + "')");
}

// Drops rows, then columns, whose missing fraction exceeds max_missing_frac,
// then imputes what is left.
inline ExpressionMatrix filter_missing(const ExpressionMatrix& m, double max_missing_frac,
                                       Impute impute) {
  if (!(max_missing_frac >= 0.0 && max_missing_frac <= 1.0)) {
    throw ParameterError("max_missing_frac must be in [0, 1]");
  }
  const auto& mask = m.missing();
  IndexList keep_rows;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double frac = static_cast<double>(mask.row(i).count()) / static_cast<double>(m.cols());
    if (frac <= max_missing_frac) keep_rows.push_back(i);
  }
  if (keep_rows.empty()) throw EmptyResultError("filtering dropped every row");
  IndexList keep_cols;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::size_t miss = 0;
    for (auto i : keep_rows) miss += mask(i, j) ? 1 : 0;
    if (static_cast<double>(miss) / static_cast<double>(keep_rows.size()) <= max_missing_frac)
      keep_cols.push_back(j);
  }
  if (keep_cols.empty()) throw EmptyResultError("filtering dropped every column");

  const auto n = static_cast<Eigen::Index>(keep_rows.size());
  const auto k = static_cast<Eigen::Index>(keep_cols.size());
  Matrix v(n, k);
  MissingMask miss(n, k);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      v(a, b) = m(keep_rows[a], keep_cols[b]);
      miss(a, b) = mask(keep_rows[a], keep_cols[b]);
    }
  }
  if (miss.any()) {
    if (impute == Impute::none) {
      throw IncompleteDataError(std::to_string(miss.count()) +
                                " missing values remain and impute=none");
    }
    Matrix filled = v;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        if (!miss(a, b)) continue;
        double acc = 0;
        std::size_t cnt = 0;
        if (impute == Impute::row_mean) {
          for (Eigen::Index q = 0; q < k; ++q)
            if (!miss(a, q)) acc += v(a, q), ++cnt;
        } else {
          for (Eigen::Index p = 0; p < n; ++p)
            if (!miss(p, b)) acc += v(p, b), ++cnt;
        }
        if (cnt == 0) {
          throw IncompleteDataError("no observed values to impute from at row '" +
                                    m.row_ids()[keep_rows[a]] + "', column '" +
                                    m.col_ids()[keep_cols[b]] + "'");
        }
        filled(a, b) = acc / static_cast<double>(cnt);
      }
    }
    v = std::move(filled);
  }
  std::vector<std::string> r, c;
  for (auto i : keep_rows) r.push_back(m.row_ids()[i]);
  for (auto j : keep_cols) c.push_back(m.col_ids()[j]);
  return ExpressionMatrix(std::move(r), std::move(c), std::move(v));
}

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<double> all_values(const Matrix& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace detail

struct Threshold {
  enum class Kind { median, mean, value } kind = Kind::median;
  double value = 0.0;

  static Threshold parse(const std::string& s) {
    if (s == "median") return {Kind::median, 0.0};
    if (s == "mean") return {Kind::mean, 0.0};
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used == s.size()) return {Kind::value, x};
    } catch (const std::exception&) {
    }
    throw ParameterError("threshold must be median, mean or a number (got '" + s + "')");
  }
};

// 1 where value > threshold, 0 otherwise (ties go to 0).
inline Outcome binarize(const ExpressionMatrix& m, Threshold t) {
  m.require_complete();
  const Matrix& x = m.values();
  double thr = t.value;
  if (t.kind == Threshold::Kind::median) thr = detail::median(detail::all_values(x));
  if (t.kind == Threshold::Kind::mean) thr = x.mean();
  Matrix out = (x.array() > thr).cast<double>().matrix();
  Outcome o{m.with_values(std::move(out)), {}};
  if (t.kind != Threshold::Kind::value && x.maxCoeff() == x.minCoeff()) {
    o.warnings.push_back("constant matrix: every cell equals the threshold, output is all zeros");
  }
  return o;
}

enum class DiscretizeScheme { equal_width, equal_frequency };

inline DiscretizeScheme scheme_from_string(const std::string& s) {
  if (s == "equal_width") return DiscretizeScheme::equal_width;
  if (s == "equal_frequency") return DiscretizeScheme::equal_frequency;
  throw ParameterError("scheme must be equal_width or equal_frequency (got '" + s + "')");
}

// Integer levels 0..levels-1.
inline Outcome discretize(const ExpressionMatrix& m, int levels, DiscretizeScheme scheme) {
  if (levels < 2) throw ParameterError("levels must be >= 2");
  m.require_complete();
  const Matrix& x = m.values();
  Matrix out(x.rows(), x.cols());
  Outcome o{m, {}};
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  if (scheme == DiscretizeScheme::equal_width) {
    const double width = (hi - lo) / levels;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (width <= 0) {
        out(k) = 0;
        continue;
      }
      const int bin = static_cast<int>(std::floor((x(k) - lo) / width));
      out(k) = std::clamp(bin, 0, levels - 1);
    }
  } else {
    auto sorted = detail::all_values(x);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    // Boundary k sits at the lower empirical k/levels quantile; a value equal
    // to a boundary falls in the lower bin.
    std::vector<double> bounds;
    for (int k = 1; k < levels; ++k) {
      std::size_t pos = (static_cast<std::size_t>(k) * n + levels - 1) / levels;
      pos = pos == 0 ? 0 : pos - 1;
      bounds.push_back(sorted[pos]);
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      int bin = 0;
      for (double b : bounds) bin += x(k) > b ? 1 : 0;
      out(k) = bin;
    }
    if (hi == lo) o.warnings.push_back("constant matrix: every cell mapped to bin 0");
  }
  o.matrix = m.with_values(std::move(out));
  return o;
}

enum class Normalization {
  log2,
  zscore_rows,
  minmax_rows,
  zscore_global,
  minmax_global,
  bistochastize,
  independent_rescale,
};

inline Normalization normalization_from_string(const std::string& s) {
  if (s == "log2") return Normalization::log2;
  if (s == "zscore_rows" || s == "zscore") return Normalization::zscore_rows;
  if (s == "minmax_rows" || s == "minmax") return Normalization::minmax_rows;
  if (s == "zscore_global") return Normalization::zscore_global;
  if (s == "minmax_global") return Normalization::minmax_global;
  if (s == "bistochastize") return Normalization::bistochastize;
  if (s == "independent_rescale") return Normalization::independent_rescale;
  throw ParameterError("unknown normalization '" + s + "'");
}

inline void require_positive(const Matrix& x, const char* what) {
  if (x.size() > 0 && x.minCoeff() <= 0.0) {
    throw DomainError(std::string(what) +
                      " requires all values > 0 (use the shift_positive step first)");
  }
}

struct BistochasticResult {
  Matrix values;
  int iterations = 0;
  double residual = 0.0;           // mean_deviation at exit
  std::vector<double> residuals;   // residual before each iteration, then final
};

// Largest distance of a row or column mean from 1 or from another such mean.
inline double mean_deviation(const Matrix& x) {
  Vector means(x.rows() + x.cols());
  means << x.rowwise().mean(), x.colwise().mean().transpose();
  const double off_target = (means.array() - 1.0).abs().maxCoeff();
  return std::max(off_target, means.maxCoeff() - means.minCoeff());
}

// Alternating row/column scaling until all row and column means are within
// tol of 1 and of each other. Does not throw on non-convergence; see
// normalize().
inline BistochasticResult bistochastize_values(const Matrix& input, double tol, int max_iter) {
  require_positive(input, "bistochastization");
  if (!(tol > 0)) throw ParameterError("tol must be > 0");
  if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
  BistochasticResult r;
  r.values = input;
  r.residual = mean_deviation(r.values);
  r.residuals.push_back(r.residual);
  while (r.residual > tol && r.iterations < max_iter) {
    const Vector rm = r.values.rowwise().mean();
    r.values = rm.cwiseInverse().asDiagonal() * r.values;
    const Vector cm = r.values.colwise().mean().transpose();
    r.values = r.values * cm.cwiseInverse().asDiagonal();
    ++r.iterations;
    r.residual = mean_deviation(r.values);
    r.residuals.push_back(r.residual);
  }
  return r;
}

inline Matrix independent_rescale_values(const Matrix& x) {
  require_positive(x, "independent rescaling");
  const Vector rs = x.rowwise().sum();
  const Vector cs = x.colwise().sum().transpose();
  return rs.cwiseSqrt().cwiseInverse().asDiagonal() * x *
         cs.cwiseSqrt().cwiseInverse().asDiagonal();
}

inline Matrix zscore_rows_values(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mu = x.row(i).mean();
    const double sd = std::sqrt((x.row(i).array() - mu).square().mean());
    if (sd == 0.0) {
      out.row(i).setZero();
    } else {
      out.row(i) = (x.row(i).array() - mu) / sd;
    }
  }
  return out;
}

struct NormalizeOptions {
  double tol = 1e-6;
  int max_iter = 1000;
};

inline Outcome normalize(const ExpressionMatrix& m, Normalization kind,
                         const NormalizeOptions& opt = {}) {
  m.require_complete();
  const Matrix& x = m.values();
  Outcome o{m, {}};
  Matrix out;
  switch (kind) {
    case Normalization::log2:
      require_positive(x, "log2");
      out.resize(x.rows(), x.cols());
      for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = std::log2(x(k));
      break;
    case Normalization::zscore_rows:
      out = zscore_rows_values(x);
      break;
    case Normalization::minmax_rows:
      out.resize(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double lo = x.row(i).minCoeff(), hi = x.row(i).maxCoeff();
        if (hi == lo) {
          out.row(i).setZero();
        } else {
          out.row(i) = (x.row(i).array() - lo) / (hi - lo);
        }
      }
      break;
    case Normalization::zscore_global: {
      const double mu = x.mean();
      const double sd = std::sqrt((x.array() - mu).square().mean());
      out = sd == 0 ? Matrix::Zero(x.rows(), x.cols()) : Matrix((x.array() - mu) / sd);
      break;
    }
    case Normalization::minmax_global: {
      const double lo = x.minCoeff(), hi = x.maxCoeff();
      out = hi == lo ? Matrix::Zero(x.rows(), x.cols()) : Matrix((x.array() - lo) / (hi - lo));
      break;
    }
    case Normalization::bistochastize: {
      auto r = bistochastize_values(x, opt.tol, opt.max_iter);
      if (r.residual > opt.tol) {
        throw ConvergenceError("bistochastization did not converge in " +
                                   std::to_string(opt.max_iter) + " iterations (residual " +
                                   std::to_string(r.residual) + ")",
                               r.residual);
      }
      out = std::move(r.values);
      break;
    }
    case Normalization::independent_rescale:
      out = independent_rescale_values(x);
      break;
  }
  o.matrix = m.with_values(std::move(out));
  return o;
}

// x -> x - min + 1. Never applied implicitly.
inline ExpressionMatrix shift_positive(const ExpressionMatrix& m) {
  m.require_complete();
  const double lo = m.values().minCoeff();
  return m.with_values((m.values().array() - lo + 1.0).matrix());
}

// ---------------------------------------------------------------------------
// Pipelines. A step is a JSON object {"op": ..., <params>}; a config is
// {"steps": [...]} or a bare array of steps.

inline Outcome apply_step(const ExpressionMatrix& m, const Json& step) {
  const auto op = step.at("op").get<std::string>();
  auto known = [&](std::initializer_list<const char*> keys) {
    for (auto it = step.begin(); it != step.end(); ++it) {
      if (it.key() == "op") continue;
      bool ok = false;
      for (auto k : keys) ok = ok || it.key() == k;
      if (!ok) throw ParameterError("unknown parameter '" + it.key() + "' for step " + op);
    }
  };
  if (op == "filter") {
    known({"max_missing_frac", "impute"});
    return {filter_missing(m, step.value("max_missing_frac", 0.5),
                           impute_from_string(step.value("impute", "row_mean"))),
            {}};
  }
  if (op == "binarize") {
    known({"threshold"});
    const Json t = step.value("threshold", Json("median"));
    return binarize(m, t.is_number() ? Threshold{Threshold::Kind::value, t.get<double>()}
                                     : Threshold::parse(t.get<std::string>()));
  }
  if (op == "discretize") {
    known({"levels", "scheme"});
    return discretize(m, step.value("levels", 3),
                      scheme_from_string(step.value("scheme", "equal_width")));
  }
  if (op == "normalize") {
    known({"kind", "tol", "max_iter"});
    NormalizeOptions o;
    o.tol = step.value("tol", o.tol);
    o.max_iter = step.value("max_iter", o.max_iter);
    return normalize(m, normalization_from_string(step.value("kind", "log2")), o);
  }
  if (op == "shift_positive") {
    known({});
    return {shift_positive(m), {}};
  }
  throw ParameterError("unknown preprocessing step '" + op +
                       "' (expected filter, binarize, discretize, normalize, shift_positive)");
}

inline Outcome apply_pipeline(const ExpressionMatrix& m, const Json& config) {
  Outcome acc{m, {}};
  try {
    const Json& steps = config.is_array() ? config : config.at("steps");
    if (!steps.is_array()) throw ParameterError("preprocessing steps must be an array");
    for (const auto& s : steps) {
      if (!s.is_object()) throw ParameterError("each preprocessing step must be an object");
      auto next = apply_step(acc.matrix, s);
      acc.matrix = std::move(next.matrix);
      for (auto& w : next.warnings) acc.warnings.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed preprocessing step: ") + e.what());
  }
  return acc;
}

}  // namespace bictk::preprocess
