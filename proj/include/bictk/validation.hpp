#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"

namespace bictk {

// Row, column and overall means of a (sub)matrix.
struct BiclusterMeans {
  Vector row_means;    // a_iJ
  Vector col_means;    // a_Ij
  double overall = 0;  // a_IJ
};

inline BiclusterMeans bicluster_means(const Matrix& sub) {
  BiclusterMeans m;
  m.row_means = sub.rowwise().mean();
  m.col_means = sub.colwise().mean().transpose();
  m.overall = sub.mean();
  return m;
}

// Mean squared residue of a dense submatrix.
inline double msr(const Matrix& sub) {
  const auto means = bicluster_means(sub);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < sub.rows(); ++i) {
    for (Eigen::Index j = 0; j < sub.cols(); ++j) {
      const double r = sub(i, j) - means.row_means(i) - means.col_means(j) + means.overall;
      acc += r * r;
    }
  }
  return acc / static_cast<double>(sub.size());
}

inline double msr(const ExpressionMatrix& m, const Bicluster& b) {
  return msr(extract_submatrix(m, b));
}

enum class VarianceMode { normalized, raw_sum };

inline double constant_variance(const Matrix& sub, VarianceMode mode = VarianceMode::normalized) {
  const double mean = sub.mean();
  const double ss = (sub.array() - mean).square().sum();
  return mode == VarianceMode::normalized ? ss / static_cast<double>(sub.size()) : ss;
}

inline double constant_variance(const ExpressionMatrix& m, const Bicluster& b,
                                VarianceMode mode = VarianceMode::normalized) {
  return constant_variance(extract_submatrix(m, b), mode);
}

// Sign matrix over consecutive bicluster columns: s_ij = sign(a_i,j+1 - a_i,j).
inline Matrix sign_matrix(const Matrix& sub) {
  Matrix s(sub.rows(), std::max<Eigen::Index>(sub.cols() - 1, 0));
  for (Eigen::Index i = 0; i < sub.rows(); ++i) {
    for (Eigen::Index j = 0; j + 1 < sub.cols(); ++j) {
      const double d = sub(i, j + 1) - sub(i, j);
      s(i, j) = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    }
  }
  return s;
}

// Spread of the sign matrix around its column means: rows that rise and fall
// together score 0 whatever the pattern.
inline double sign_variance(const Matrix& sub, VarianceMode mode = VarianceMode::normalized) {
  if (sub.cols() < 2) return 0.0;
  const Matrix s = sign_matrix(sub);
  const double ss = (s.rowwise() - s.colwise().mean()).array().square().sum();
  return mode == VarianceMode::normalized ? ss / static_cast<double>(s.size()) : ss;
}

inline double sign_variance(const ExpressionMatrix& m, const Bicluster& b,
                            VarianceMode mode = VarianceMode::normalized) {
  return sign_variance(extract_submatrix(m, b), mode);
}

namespace detail {

inline std::size_t intersection_size(const IndexList& a, const IndexList& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace detail

// Cell-level Jaccard index of two biclusters (cells = rows x cols).
inline double jaccard(const Bicluster& a, const Bicluster& b) {
  const double inter = static_cast<double>(detail::intersection_size(a.rows, b.rows) *
                                           detail::intersection_size(a.cols, b.cols));
  const double uni = static_cast<double>(a.cell_count() + b.cell_count()) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

struct SetComparison {
  Matrix pairwise;  // found x reference
  // For each found bicluster the best Jaccard against the reference set,
  // averaged over found biclusters.
  double best_match_mean = 0.0;
};

inline SetComparison compare_sets(const BiclusterSet& found, const BiclusterSet& reference) {
  SetComparison c;
  c.pairwise = Matrix::Zero(found.size(), reference.size());
  for (std::size_t a = 0; a < found.size(); ++a)
    for (std::size_t b = 0; b < reference.size(); ++b)
      c.pairwise(a, b) = jaccard(found.biclusters[a], reference.biclusters[b]);
  if (found.size() > 0 && reference.size() > 0) {
    c.best_match_mean = c.pairwise.rowwise().maxCoeff().mean();
  }
  return c;
}

// Symmetric Hausdorff distance between the value sets of two biclusters,
// with d(x, y) = |x - y| over scalar cell values.
inline double hausdorff(const Matrix& sub1, const Matrix& sub2) {
  std::vector<double> a(sub1.data(), sub1.data() + sub1.size());
  std::vector<double> b(sub2.data(), sub2.data() + sub2.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
    double worst = 0.0;
    for (double x : from) {
      auto it = std::lower_bound(to.begin(), to.end(), x);
      double best = std::numeric_limits<double>::infinity();
      if (it != to.end()) best = std::min(best, *it - x);
      if (it != to.begin()) best = std::min(best, x - *std::prev(it));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline double hausdorff(const ExpressionMatrix& m, const Bicluster& b1, const Bicluster& b2) {
  return hausdorff(extract_submatrix(m, b1), extract_submatrix(m, b2));
}

// Co-expression components of the differential co-expression score.
//   T_k: mean pairwise Pearson correlation of the bicluster genes over
//        condition set k.
//   Q_k: mean pairwise |Pearson correlation| over the same pairs.
struct SbComponents {
  double t1 = 0, t2 = 0;
  double q1 = 0, q2 = 0;
  double omega = 1.0;
};

struct SbResult {
  double value = 0.0;
  SbComponents components;
  bool zero_variance_warning = false;
};

namespace detail {

// Returns {mean r, mean |r|} over all gene pairs restricted to `cols`.
inline std::pair<double, double> coexpression(const Matrix& values, const IndexList& rows,
                                              const IndexList& cols, bool& zero_var) {
  const std::size_t n = rows.size();
  const std::size_t k = cols.size();
  std::vector<Vector> centered(n, Vector(k));
  std::vector<double> norms(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < k; ++q) centered[p](q) = values(rows[p], cols[q]);
    centered[p].array() -= centered[p].mean();
    norms[p] = centered[p].norm();
  }
  double sum = 0, sum_abs = 0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double r = 0.0;
      if (norms[a] == 0.0 || norms[b] == 0.0) {
        zero_var = true;
      } else {
        r = centered[a].dot(centered[b]) / (norms[a] * norms[b]);
      }
      sum += r;
      sum_abs += std::abs(r);
      ++pairs;
    }
  }
  return {sum / static_cast<double>(pairs), sum_abs / static_cast<double>(pairs)};
}

}  // namespace detail

// Differential co-expression score: log of max(T1+w, Q1+w) / max(T2+w, Q2+w),
// where condition set 1 is the bicluster's columns and set 2 is
// `reference_cols` (default: the complement of the bicluster's columns).
inline SbResult sb_score(const ExpressionMatrix& m, const Bicluster& b,
                         const std::optional<IndexList>& reference_cols = std::nullopt,
                         double omega = 1.0) {
  validate_bicluster(b, m);
  if (omega <= 0) throw ParameterError("omega must be > 0");
  if (b.rows.size() < 2) {
    throw UndefinedIndexError("SB score needs at least two genes");
  }
  IndexList set2;
  if (reference_cols) {
    set2 = make_bicluster({0}, *reference_cols).cols;
    for (auto j : set2)
      if (j >= m.cols()) throw ValidationError("reference column out of bounds");
  } else {
    std::set<std::size_t> own(b.cols.begin(), b.cols.end());
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!own.count(j)) set2.push_back(j);
  }
  if (b.cols.size() < 2 || set2.size() < 2) {
    throw UndefinedIndexError("SB score needs at least two columns in each condition set");
  }
  SbResult r;
  r.components.omega = omega;
  std::tie(r.components.t1, r.components.q1) =
      detail::coexpression(m.values(), b.rows, b.cols, r.zero_variance_warning);
  std::tie(r.components.t2, r.components.q2) =
      detail::coexpression(m.values(), b.rows, set2, r.zero_variance_warning);
  const auto& c = r.components;
  const double num = std::max(c.t1 + omega, c.q1 + omega);
  const double den = std::max(c.t2 + omega, c.q2 + omega);
  r.value = std::log(num / den);
  return r;
}

inline double overall_mse(const ExpressionMatrix& m, const BiclusterSet& s) {
  if (s.biclusters.empty()) throw UndefinedIndexError("overall MSE of an empty set");
  double acc = 0;
  for (const auto& b : s.biclusters) acc += msr(m, b);
  return acc / static_cast<double>(s.size());
}

// ---------------------------------------------------------------------------
// Report assembly.

enum class Index { msr, constant_variance, sign_variance, sb_score, jaccard, hausdorff };

inline const std::vector<Index>& all_indices() {
  static const std::vector<Index> v = {Index::msr,      Index::constant_variance,
                                       Index::sign_variance, Index::sb_score,
                                       Index::jaccard,  Index::hausdorff};
  return v;
}

inline const char* to_string(Index i) {
  switch (i) {
    case Index::msr: return "msr";
    case Index::constant_variance: return "constant_variance";
    case Index::sign_variance: return "sign_variance";
    case Index::sb_score: return "sb_score";
    case Index::jaccard: return "jaccard";
    case Index::hausdorff: return "hausdorff";
  }
  return "?";
}

inline Index index_from_string(const std::string& s) {
  for (auto i : all_indices())
    if (s == to_string(i)) return i;
  if (s == "mse") return Index::msr;
  if (s == "cv") return Index::constant_variance;
  if (s == "sv") return Index::sign_variance;
  if (s == "sb") return Index::sb_score;
  throw ParameterError("unknown validation index '" + s +
                       "' (expected msr|mse, constant_variance, sign_variance, sb_score, "
                       "jaccard, hausdorff or all)");
}

struct BiclusterIndices {
  std::optional<double> msr;
  std::optional<double> constant_variance;
  std::optional<double> sign_variance;
  std::optional<double> sb_score;  // empty when undefined for this bicluster
  std::string sb_note;
};

struct ValidationOptions {
  std::vector<Index> indices = all_indices();
  double omega = 1.0;
  VarianceMode variance_mode = VarianceMode::normalized;
};

struct ValidationReport {
  std::vector<Index> indices;
  std::vector<BiclusterIndices> per_bicluster;
  // Means over biclusters where the index is defined.
  std::optional<double> mean_msr, mean_constant_variance, mean_sign_variance, mean_sb_score;
  std::optional<double> overall_mse;
  // Pairwise comparisons against the reference set (the set itself when no
  // reference is given).
  std::optional<Matrix> jaccard;
  std::optional<double> jaccard_best_match;
  std::optional<Matrix> hausdorff;
};

inline bool wants(const ValidationOptions& o, Index i) {
  return std::find(o.indices.begin(), o.indices.end(), i) != o.indices.end();
}

inline ValidationReport validate(const ExpressionMatrix& m, const BiclusterSet& s,
                                 const ValidationOptions& opt = {},
                                 const BiclusterSet* reference = nullptr) {
  validate_set(s, m);
  if (reference) validate_set(*reference, m);
  ValidationReport rep;
  rep.indices = opt.indices;
  auto mean_of = [&](auto member) -> std::optional<double> {
    double acc = 0;
    std::size_t n = 0;
    for (const auto& pb : rep.per_bicluster) {
      if (pb.*member) {
        acc += *(pb.*member);
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
  };

  for (const auto& b : s.biclusters) {
    BiclusterIndices pb;
    const Matrix sub = extract_submatrix(m, b);
    if (wants(opt, Index::msr)) pb.msr = msr(sub);
    if (wants(opt, Index::constant_variance))
      pb.constant_variance = constant_variance(sub, opt.variance_mode);
    if (wants(opt, Index::sign_variance))
      pb.sign_variance = sign_variance(sub, opt.variance_mode);
    if (wants(opt, Index::sb_score)) {
      try {
        const auto sb = sb_score(m, b, std::nullopt, opt.omega);
        pb.sb_score = sb.value;
        if (sb.zero_variance_warning) pb.sb_note = "zero-variance gene row treated as r=0";
      } catch (const UndefinedIndexError& e) {
        pb.sb_note = e.what();
      }
    }
    rep.per_bicluster.push_back(std::move(pb));
  }
  rep.mean_msr = mean_of(&BiclusterIndices::msr);
  rep.mean_constant_variance = mean_of(&BiclusterIndices::constant_variance);
  rep.mean_sign_variance = mean_of(&BiclusterIndices::sign_variance);
  rep.mean_sb_score = mean_of(&BiclusterIndices::sb_score);
  if (wants(opt, Index::msr) && !s.biclusters.empty()) rep.overall_mse = rep.mean_msr;

  const BiclusterSet& ref = reference ? *reference : s;
  if (wants(opt, Index::jaccard)) {
    auto cmp = compare_sets(s, ref);
    rep.jaccard = std::move(cmp.pairwise);
    if (!s.biclusters.empty() && !ref.biclusters.empty())
      rep.jaccard_best_match = cmp.best_match_mean;
  }
  if (wants(opt, Index::hausdorff)) {
    Matrix h(s.size(), ref.size());
    std::vector<Matrix> subs_ref;
    for (const auto& b : ref.biclusters) subs_ref.push_back(extract_submatrix(m, b));
    for (std::size_t a = 0; a < s.size(); ++a) {
      const Matrix sa = extract_submatrix(m, s.biclusters[a]);
      for (std::size_t b = 0; b < ref.size(); ++b) h(a, b) = hausdorff(sa, subs_ref[b]);
    }
    rep.hausdorff = std::move(h);
  }
  return rep;
}

namespace detail {

inline Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json matrix_json(const Matrix& mat) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) r.push_back(mat(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

// scope: "all" (per-bicluster table and aggregates), "individual", "overall".
inline Json to_json(const ValidationReport& rep, const std::string& scope = "all") {
  Json out;
  Json names = Json::array();
  for (auto i : rep.indices) names.push_back(to_string(i));
  out["indices"] = names;
  if (scope != "overall") {
    Json list = Json::array();
    for (std::size_t k = 0; k < rep.per_bicluster.size(); ++k) {
      const auto& pb = rep.per_bicluster[k];
      Json e;
      e["bicluster"] = k;
      if (pb.msr) e["msr"] = *pb.msr;
      if (pb.constant_variance) e["constant_variance"] = *pb.constant_variance;
      if (pb.sign_variance) e["sign_variance"] = *pb.sign_variance;
      if (std::find(rep.indices.begin(), rep.indices.end(), Index::sb_score) !=
          rep.indices.end()) {
        e["sb_score"] = detail::optional_json(pb.sb_score);
        if (!pb.sb_note.empty()) e["sb_note"] = pb.sb_note;
      }
      list.push_back(std::move(e));
    }
    out["per_bicluster"] = std::move(list);
  }
  if (scope != "individual") {
    Json agg;
    auto put = [&](const char* key, const std::optional<double>& v, Index idx) {
      if (std::find(rep.indices.begin(), rep.indices.end(), idx) != rep.indices.end())
        agg[key] = detail::optional_json(v);
    };
    put("msr", rep.mean_msr, Index::msr);
    put("constant_variance", rep.mean_constant_variance, Index::constant_variance);
    put("sign_variance", rep.mean_sign_variance, Index::sign_variance);
    put("sb_score", rep.mean_sb_score, Index::sb_score);
    put("mse", rep.overall_mse, Index::msr);
    put("jaccard_best_match", rep.jaccard_best_match, Index::jaccard);
    out["aggregate"] = std::move(agg);
  }
  if (rep.jaccard) out["jaccard"] = detail::matrix_json(*rep.jaccard);
  if (rep.hausdorff) out["hausdorff"] = detail::matrix_json(*rep.hausdorff);
  return out;
}

}  // namespace bictk
