#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "../core.hpp"
#include "../rng.hpp"
#include "../validation.hpp"

namespace bictk::algo {

// Called once per outer iteration with the objective value after it.
using TraceHook = std::function<void(int iteration, double objective)>;

// ---------------------------------------------------------------------------
// Parameter schemas. Each algorithm declares its parameters once; the schema
// drives default filling, range checks (CLI, service, library) and the
// machine-readable document the UI builds its forms from.

enum class ParamType { integer, real, choice };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::real;
  Json default_value;
  std::optional<double> min, max;
  bool min_exclusive = false;
  bool max_exclusive = false;
  std::vector<std::string> choices;
  std::string description;
};

inline ParamSpec int_param(std::string name, long long def, std::optional<double> min,
                           std::string desc, std::optional<double> max = std::nullopt) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::integer;
  p.default_value = def;
  p.min = min;
  p.max = max;
  p.description = std::move(desc);
  return p;
}

inline ParamSpec real_param(std::string name, double def, std::optional<double> min,
                            bool min_exclusive, std::string desc,
                            std::optional<double> max = std::nullopt,
                            bool max_exclusive = false) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::real;
  p.default_value = def;
  p.min = min;
  p.min_exclusive = min_exclusive;
  p.max = max;
  p.max_exclusive = max_exclusive;
  p.description = std::move(desc);
  return p;
}

inline ParamSpec choice_param(std::string name, std::string def,
                              std::vector<std::string> choices, std::string desc) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::choice;
  p.default_value = std::move(def);
  p.choices = std::move(choices);
  p.description = std::move(desc);
  return p;
}

using Schema = std::vector<ParamSpec>;

inline Json schema_to_json(const Schema& schema) {
  Json out = Json::array();
  for (const auto& p : schema) {
    Json j;
    j["name"] = p.name;
    j["type"] = p.type == ParamType::integer ? "integer"
                : p.type == ParamType::real  ? "real"
                                             : "choice";
    j["default"] = p.default_value;
    if (p.min) {
      j["min"] = *p.min;
      j["min_exclusive"] = p.min_exclusive;
    }
    if (p.max) {
      j["max"] = *p.max;
      j["max_exclusive"] = p.max_exclusive;
    }
    if (!p.choices.empty()) j["choices"] = p.choices;
    j["description"] = p.description;
    out.push_back(std::move(j));
  }
  return out;
}

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

inline Json coerce(const ParamSpec& p, const Json& v) {
  const std::string where = "parameter '" + p.name + "'";
  if (p.type == ParamType::choice) {
    if (!v.is_string()) throw ParameterError(where + " must be a string");
    const auto s = v.get<std::string>();
    if (std::find(p.choices.begin(), p.choices.end(), s) == p.choices.end()) {
      std::string all;
      for (const auto& c : p.choices) all += (all.empty() ? "" : ", ") + c;
      throw ParameterError(where + " must be one of {" + all + "} (got '" + s + "')");
    }
    return v;
  }
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      std::size_t used = 0;
      x = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw ParameterError(where + " must be numeric (got '" + s + "')");
    }
  } else {
    throw ParameterError(where + " must be numeric");
  }
  if (!std::isfinite(x)) throw ParameterError(where + " must be finite");
  if (p.min) {
    const bool bad = p.min_exclusive ? !(x > *p.min) : !(x >= *p.min);
    if (bad) {
      throw ParameterError(where + " must be " + (p.min_exclusive ? "> " : ">= ") +
                           fmt_num(*p.min) + " (got " + fmt_num(x) + ")");
    }
  }
  if (p.max) {
    const bool bad = p.max_exclusive ? !(x < *p.max) : !(x <= *p.max);
    if (bad) {
      throw ParameterError(where + " must be " + (p.max_exclusive ? "< " : "<= ") +
                           fmt_num(*p.max) + " (got " + fmt_num(x) + ")");
    }
  }
  if (p.type == ParamType::integer) {
    if (x != std::floor(x)) throw ParameterError(where + " must be an integer");
    return Json(static_cast<long long>(x));
  }
  return Json(x);
}

}  // namespace detail

// Fills defaults, coerces strings, and range-checks. Unknown keys are errors.
inline Json resolve_params(const Schema& schema, const Json& user,
                           const std::string& algorithm = "") {
  if (!user.is_null() && !user.is_object()) throw ParameterError("params must be an object");
  Json out = Json::object();
  for (const auto& p : schema) {
    const bool given = user.is_object() && user.contains(p.name);
    out[p.name] = detail::coerce(p, given ? user.at(p.name) : p.default_value);
  }
  if (user.is_object()) {
    for (auto it = user.begin(); it != user.end(); ++it) {
      const bool known = std::any_of(schema.begin(), schema.end(),
                                     [&](const ParamSpec& p) { return p.name == it.key(); });
      if (!known) {
        std::string names;
        for (const auto& p : schema) names += (names.empty() ? "" : ", ") + p.name;
        throw ParameterError("unknown parameter '" + it.key() + "'" +
                             (algorithm.empty() ? "" : " for " + algorithm) +
                             " (valid: " + names + ")");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared numerics.

inline void require_nonnegative(const Matrix& x, const char* algo) {
  if (x.size() > 0 && x.minCoeff() < 0.0) {
    throw DomainError(std::string(algo) + " requires a nonnegative matrix");
  }
}

inline bool is_integer_valued(const Matrix& x) {
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (x(k) != std::floor(x(k))) return false;
  return true;
}

struct Svd {
  Matrix u;       // n x r
  Vector sigma;   // r
  Matrix v;       // m x r
};

// Thin SVD with a sign convention (largest-magnitude entry of each left
// vector positive) so results do not depend on solver internals.
inline Svd thin_svd(const Matrix& x) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index k = 0; k < out.u.cols(); ++k) {
    Eigen::Index arg = 0;
    out.u.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.u(arg, k) < 0) {
      out.u.col(k) *= -1.0;
      out.v.col(k) *= -1.0;
    }
  }
  return out;
}

struct KMeansOptions {
  int max_iter = 50;
  double tol = 1e-8;
};

// Lloyd's k-means on the rows of `points` with seeded farthest-point
// initialization (first center drawn from rng, each next center the point
// farthest from the chosen ones, lowest index on ties). Returns labels
// renumbered in order of first appearance. Fewer than k clusters come back
// when the data has fewer distinct points.
inline std::vector<std::size_t> kmeans(const Matrix& points, std::size_t k, Rng& rng,
                                       const KMeansOptions& opt = {}) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::size_t> labels(n, 0);
  if (n == 0 || k <= 1) return labels;
  k = std::min(k, n);

  std::vector<Eigen::Index> seeds{static_cast<Eigen::Index>(rng.index(n))};
  Vector nearest(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    nearest(i) = (points.row(i) - points.row(seeds[0])).squaredNorm();
  while (seeds.size() < k) {
    Eigen::Index far = 0;
    const double d = nearest.maxCoeff(&far);
    if (d <= 0.0) break;
    seeds.push_back(far);
    for (std::size_t i = 0; i < n; ++i)
      nearest(i) = std::min(nearest(i), (points.row(i) - points.row(far)).squaredNorm());
  }
  const std::size_t kk = seeds.size();
  Matrix centers(kk, points.cols());
  for (std::size_t c = 0; c < kk; ++c) centers.row(c) = points.row(seeds[c]);

  for (int it = 0; it < opt.max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < kk; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          labels[i] = c;
        }
      }
    }
    Matrix next = Matrix::Zero(kk, points.cols());
    std::vector<std::size_t> count(kk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(labels[i]) += points.row(i);
      ++count[labels[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < kk; ++c) {
      if (count[c] == 0) {
        next.row(c) = centers.row(c);
      } else {
        next.row(c) /= static_cast<double>(count[c]);
      }
      shift = std::max(shift, (next.row(c) - centers.row(c)).squaredNorm());
    }
    centers = std::move(next);
    if (shift <= opt.tol * opt.tol) break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kk; ++c) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        labels[i] = c;
      }
    }
  }
  std::vector<std::size_t> remap(kk, kk);
  std::size_t next_label = 0;
  for (auto& l : labels) {
    if (remap[l] == kk) remap[l] = next_label++;
    l = remap[l];
  }
  return labels;
}

inline std::vector<IndexList> groups_from_labels(const std::vector<std::size_t>& labels) {
  std::vector<IndexList> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= groups.size()) groups.resize(labels[i] + 1);
    groups[labels[i]].push_back(i);
  }
  std::erase_if(groups, [](const IndexList& g) { return g.empty(); });
  return groups;
}

// Keeps the first of any pair with cell-Jaccard above `threshold`.
inline std::vector<Bicluster> dedup_by_jaccard(std::vector<Bicluster> in, double threshold) {
  std::vector<Bicluster> out;
  for (auto& b : in) {
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const Bicluster& o) { return jaccard(o, b) > threshold; });
    if (!dup) out.push_back(std::move(b));
  }
  return out;
}

// Tiling from row and column cluster labels: every non-empty cross product.
inline std::vector<Bicluster> tiling(const std::vector<std::size_t>& row_labels,
                                     const std::vector<std::size_t>& col_labels) {
  std::vector<Bicluster> out;
  for (const auto& rg : groups_from_labels(row_labels))
    for (const auto& cg : groups_from_labels(col_labels)) out.push_back(Bicluster{rg, cg, {}});
  return out;
}

inline BiclusterSet make_set(std::string algorithm, Json params, std::uint64_t seed,
                             std::vector<Bicluster> bs) {
  BiclusterSet s;
  s.algorithm = std::move(algorithm);
  s.params = std::move(params);
  s.seed = seed;
  s.biclusters = std::move(bs);
  return s;
}

}  // namespace bictk::algo
