#pragma once

#include <algorithm>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct MsvdParams {
  long long block_rows = 0;
  long long block_cols = 0;
  long long n_eigen = 2;
  long long k = 4;

  static const Schema& schema() {
    static const Schema s = {
        int_param("block_rows", 0, 0, "rows per block (0 = a quarter of the rows, rounded up)"),
        int_param("block_cols", 0, 0, "columns per block (0 = half the columns, rounded up)"),
        int_param("n_eigen", 2, 1, "singular directions kept per block"),
        int_param("k", 4, 1, "row clusters per block"),
    };
    return s;
  }
  Json to_json() const {
    return {{"block_rows", block_rows}, {"block_cols", block_cols}, {"n_eigen", n_eigen}, {"k", k}};
  }
  static MsvdParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "msvd");
    return {r["block_rows"].get<long long>(), r["block_cols"].get<long long>(),
            r["n_eigen"].get<long long>(), r["k"].get<long long>()};
  }
};

// Index into [0, n) after mirror reflection at the end of the range.
inline std::size_t reflect_index(std::size_t i, std::size_t n) {
  const std::size_t period = 2 * n;
  const std::size_t r = i % period;
  return r < n ? r : period - 1 - r;
}

// Block-wise SVD: the matrix is tiled into equal blocks (the last ones padded
// by reflection), each block's rows are projected onto its top singular
// directions and clustered by k-means; every row cluster of a block becomes a
// bicluster over that block's columns.
inline BiclusterSet run_msvd(const ExpressionMatrix& m, const MsvdParams& params,
                             std::uint64_t seed) {
  const MsvdParams p = MsvdParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  const std::size_t n = m.rows(), nc = m.cols();
  const std::size_t br = p.block_rows > 0 ? static_cast<std::size_t>(p.block_rows) : (n + 3) / 4;
  const std::size_t bc = p.block_cols > 0 ? static_cast<std::size_t>(p.block_cols) : (nc + 1) / 2;
  if (static_cast<std::size_t>(p.n_eigen) > std::min(br, bc)) {
    throw ParameterError("parameter 'n_eigen' must be <= min(block_rows, block_cols) = " +
                         std::to_string(std::min(br, bc)) + " (got " +
                         std::to_string(p.n_eigen) + ")");
  }
  Rng rng(seed);
  std::vector<Bicluster> out;
  for (std::size_t r0 = 0; r0 < n; r0 += br) {
    for (std::size_t c0 = 0; c0 < nc; c0 += bc) {
      Matrix block(static_cast<Eigen::Index>(br), static_cast<Eigen::Index>(bc));
      for (std::size_t i = 0; i < br; ++i)
        for (std::size_t j = 0; j < bc; ++j)
          block(i, j) = a(reflect_index(r0 + i, n), reflect_index(c0 + j, nc));
      const Svd svd = thin_svd(block);
      const auto d = static_cast<Eigen::Index>(p.n_eigen);
      const std::size_t real_rows = std::min(br, n - r0);
      const Matrix proj =
          (svd.u.leftCols(d) * svd.sigma.head(d).asDiagonal()).topRows(real_rows);
      const auto labels = kmeans(proj, static_cast<std::size_t>(p.k), rng);
      IndexList cols;
      for (std::size_t j = c0; j < std::min(c0 + bc, nc); ++j) cols.push_back(j);
      for (auto& g : groups_from_labels(labels)) {
        for (auto& i : g) i += r0;
        out.push_back(Bicluster{g, cols, {}});
      }
    }
  }
  return make_set("msvd", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
