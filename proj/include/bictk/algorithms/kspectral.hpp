#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "../preprocess.hpp"
#include "common.hpp"

namespace bictk::algo {

struct KSpectralParams {
  long long k_rows = 2;
  long long k_cols = 2;
  std::string normalization = "bistochastize";
  long long n_singular_vectors = 3;

  static const Schema& schema() {
    static const Schema s = {
        int_param("k_rows", 2, 1, "number of row clusters"),
        int_param("k_cols", 2, 1, "number of column clusters"),
        choice_param("normalization", "bistochastize",
                     {"bistochastize", "independent_rescale", "log_interactions"},
                     "matrix normalization before the decomposition"),
        int_param("n_singular_vectors", 3, 1, "singular vectors used for the embedding"),
    };
    return s;
  }
  Json to_json() const {
    return {{"k_rows", k_rows},
            {"k_cols", k_cols},
            {"normalization", normalization},
            {"n_singular_vectors", n_singular_vectors}};
  }
  static KSpectralParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "kspectral");
    return {r["k_rows"].get<long long>(), r["k_cols"].get<long long>(),
            r["normalization"].get<std::string>(), r["n_singular_vectors"].get<long long>()};
  }
};

// Normalized matrix and the index of the first informative singular vector.
struct SpectralInput {
  Matrix values;
  Eigen::Index first = 0;
};

inline SpectralInput spectral_normalize(const Matrix& a, const std::string& kind) {
  if (kind == "bistochastize") {
    auto r = preprocess::bistochastize_values(a, 1e-9, 1000);
    return {std::move(r.values), 1};
  }
  if (kind == "independent_rescale") return {preprocess::independent_rescale_values(a), 1};
  preprocess::require_positive(a, "log_interactions");
  Matrix l = a.array().log().matrix();
  const Vector rm = l.rowwise().mean();
  const Eigen::RowVectorXd cm = l.colwise().mean();
  const double mu = l.mean();
  l.colwise() -= rm;
  l.rowwise() -= cm;
  l.array() += mu;
  return {std::move(l), 0};
}

// Spectral biclustering of checkerboard structure: normalize, embed rows and
// columns with singular vectors scaled by their singular values, and run
// k-means separately on each side. The biclusters are all cross products.
inline BiclusterSet run_kspectral(const ExpressionMatrix& m, const KSpectralParams& params,
                                  std::uint64_t seed) {
  const KSpectralParams p = KSpectralParams::from_json(params.to_json());
  m.require_complete();
  const SpectralInput in = spectral_normalize(m.values(), p.normalization);
  const Svd svd = thin_svd(in.values);
  Rng rng(seed);

  const Eigen::Index avail = std::max<Eigen::Index>(0, svd.sigma.size() - in.first);
  const Eigen::Index d = std::min<Eigen::Index>(p.n_singular_vectors, avail);
  Matrix row_emb = Matrix::Zero(in.values.rows(), std::max<Eigen::Index>(d, 1));
  Matrix col_emb = Matrix::Zero(in.values.cols(), std::max<Eigen::Index>(d, 1));
  if (d > 0) {
    const Vector s = svd.sigma.segment(in.first, d);
    row_emb = svd.u.middleCols(in.first, d) * s.asDiagonal();
    col_emb = svd.v.middleCols(in.first, d) * s.asDiagonal();
  }
  const auto row_labels = kmeans(row_emb, static_cast<std::size_t>(p.k_rows), rng);
  const auto col_labels = kmeans(col_emb, static_cast<std::size_t>(p.k_cols), rng);
  return make_set("kspectral", p.to_json(), seed, tiling(row_labels, col_labels));
}

}  // namespace bictk::algo
