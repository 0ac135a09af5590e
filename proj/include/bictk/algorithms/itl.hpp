#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct ItlParams {
  long long k_rows = 2;
  long long k_cols = 2;
  long long max_iter = 100;

  static const Schema& schema() {
    static const Schema s = {
        int_param("k_rows", 2, 1, "number of row clusters"),
        int_param("k_cols", 2, 1, "number of column clusters"),
        int_param("max_iter", 100, 1, "maximum alternating updates"),
    };
    return s;
  }
  Json to_json() const { return {{"k_rows", k_rows}, {"k_cols", k_cols}, {"max_iter", max_iter}}; }
  static ItlParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "itl");
    return {r["k_rows"].get<long long>(), r["k_cols"].get<long long>(),
            r["max_iter"].get<long long>()};
  }
};

// Joint distribution of row and column clusters.
inline Matrix cluster_joint(const Matrix& pxy, const std::vector<std::size_t>& rl,
                            std::size_t kr, const std::vector<std::size_t>& cl, std::size_t kc) {
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(kr), static_cast<Eigen::Index>(kc));
  for (Eigen::Index i = 0; i < pxy.rows(); ++i)
    for (Eigen::Index j = 0; j < pxy.cols(); ++j) q(rl[i], cl[j]) += pxy(i, j);
  return q;
}

inline double mutual_information(const Matrix& joint) {
  const Vector pr = joint.rowwise().sum();
  const Vector pc = joint.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index a = 0; a < joint.rows(); ++a)
    for (Eigen::Index b = 0; b < joint.cols(); ++b) {
      const double v = joint(a, b);
      if (v > 0) mi += v * std::log(v / (pr(a) * pc(b)));
    }
  return mi;
}

// Mutual information between row and column clusters for labels on a
// nonnegative matrix.
inline double clustered_mutual_information(const Matrix& a, const std::vector<std::size_t>& rl,
                                           const std::vector<std::size_t>& cl) {
  std::size_t kr = 0, kc = 0;
  for (auto l : rl) kr = std::max(kr, l + 1);
  for (auto l : cl) kc = std::max(kc, l + 1);
  return mutual_information(cluster_joint(a / a.sum(), rl, kr, cl, kc));
}

namespace detail {

inline std::size_t compact_labels(std::vector<std::size_t>& labels) {
  std::vector<std::size_t> remap;
  std::size_t next = 0;
  for (auto& l : labels) {
    if (l >= remap.size()) remap.resize(l + 1, SIZE_MAX);
    if (remap[l] == SIZE_MAX) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

// Reassigns each row of pxy to the cluster whose prototype q(y | row
// cluster) is closest in KL divergence. Keeps the current label unless
// another is strictly better. Returns whether any label changed.
inline bool itl_update_rows(const Matrix& pxy, std::vector<std::size_t>& rl, std::size_t kr,
                            const std::vector<std::size_t>& cl, std::size_t kc) {
  const Matrix q = cluster_joint(pxy, rl, kr, cl, kc);
  const Vector q_row = q.rowwise().sum();
  const Vector q_col = q.colwise().sum().transpose();
  Vector py_given_yhat(pxy.cols());  // p(y | y-hat)
  const Vector py = pxy.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < pxy.cols(); ++j)
    py_given_yhat(j) = q_col(cl[j]) > 0 ? py(j) / q_col(cl[j]) : 0.0;

  bool changed = false;
  for (Eigen::Index i = 0; i < pxy.rows(); ++i) {
    const double px = pxy.row(i).sum();
    if (!(px > 0)) continue;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = rl[i];
    std::vector<double> kl(kr, 0.0);
    for (std::size_t c = 0; c < kr; ++c) {
      if (!(q_row(c) > 0)) {
        kl[c] = std::numeric_limits<double>::infinity();
        continue;
      }
      double d = 0.0;
      for (Eigen::Index j = 0; j < pxy.cols(); ++j) {
        const double pj = pxy(i, j) / px;
        if (pj <= 0) continue;
        const double qj = q(c, cl[j]) / q_row(c) * py_given_yhat(j);
        if (!(qj > 0)) {
          d = std::numeric_limits<double>::infinity();
          break;
        }
        d += pj * std::log(pj / qj);
      }
      kl[c] = d;
    }
    best = kl[rl[i]];
    for (std::size_t c = 0; c < kr; ++c)
      if (kl[c] < best) {
        best = kl[c];
        arg = c;
      }
    if (arg != rl[i]) {
      rl[i] = arg;
      changed = true;
    }
  }
  return changed;
}

}  // namespace detail

// Information-theoretic co-clustering: alternately reassign rows and columns
// to minimize the loss in mutual information between the clustered row and
// column variables. Empty clusters are dropped.
inline BiclusterSet run_itl(const ExpressionMatrix& m, const ItlParams& params, std::uint64_t seed,
                            const TraceHook& trace = {}) {
  const ItlParams p = ItlParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  require_nonnegative(a, "itl");
  const double total = a.sum();
  if (!(total > 0)) throw DomainError("itl requires a matrix with positive total mass");
  const Matrix pxy = a / total;
  Rng rng(seed);

  const auto conditional = [](const Matrix& x) {
    Matrix out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double s = x.row(i).sum();
      if (s > 0) out.row(i) /= s;
    }
    return out;
  };
  std::vector<std::size_t> rl = kmeans(conditional(pxy), static_cast<std::size_t>(p.k_rows), rng);
  std::vector<std::size_t> cl =
      kmeans(conditional(pxy.transpose()), static_cast<std::size_t>(p.k_cols), rng);
  std::size_t kr = detail::compact_labels(rl), kc = detail::compact_labels(cl);

  for (long long it = 0; it < p.max_iter; ++it) {
    const bool rows_changed = detail::itl_update_rows(pxy, rl, kr, cl, kc);
    kr = detail::compact_labels(rl);
    const Matrix pt = pxy.transpose();
    const bool cols_changed = detail::itl_update_rows(pt, cl, kc, rl, kr);
    kc = detail::compact_labels(cl);
    if (trace) trace(static_cast<int>(it), mutual_information(cluster_joint(pxy, rl, kr, cl, kc)));
    if (!rows_changed && !cols_changed) break;
  }
  auto bs = tiling(rl, cl);
  const double mi = mutual_information(cluster_joint(pxy, rl, kr, cl, kc));
  Json echo = p.to_json();
  echo["mutual_information"] = mi;
  return make_set("itl", std::move(echo), seed, std::move(bs));
}

}  // namespace bictk::algo
