#pragma once

#include <cmath>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct BsgpParams {
  long long k = 2;

  static const Schema& schema() {
    static const Schema s = {int_param("k", 2, 2, "number of co-clusters")};
    return s;
  }
  Json to_json() const { return {{"k", k}}; }
  static BsgpParams from_json(const Json& j) {
    return {resolve_params(schema(), j, "bsgp")["k"].get<long long>()};
  }
};

// Rows and columns as the two vertex sets of a weighted bipartite graph,
// with edge weights a(i, j).
struct BipartiteGraph {
  Vector row_degree, col_degree;
  Matrix scaled;  // D1^-1/2 A D2^-1/2; isolated vertices scale by 0

  explicit BipartiteGraph(const Matrix& a) {
    require_nonnegative(a, "bsgp");
    row_degree = a.rowwise().sum();
    col_degree = a.colwise().sum().transpose();
    scaled = inv_sqrt(row_degree).asDiagonal() * a * inv_sqrt(col_degree).asDiagonal();
  }

  static Vector inv_sqrt(const Vector& d) {
    Vector out(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) out(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
    return out;
  }

  // Weight of edges whose endpoints carry different labels.
  static double cut(const Matrix& a, const std::vector<std::size_t>& row_labels,
                    const std::vector<std::size_t>& col_labels) {
    double c = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (row_labels[i] != col_labels[j]) c += a(i, j);
    return c;
  }
};

// Spectral co-clustering: rows and columns embedded with the leading
// singular vectors of the scaled matrix, then clustered jointly by k-means.
// Clusters that end up without rows or without columns are merged into the
// nearest cluster that has both, so the output is a co-partition.
inline BiclusterSet run_bsgp(const ExpressionMatrix& m, const BsgpParams& params,
                             std::uint64_t seed) {
  const BsgpParams p = BsgpParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  const BipartiteGraph g(a);
  const auto n = a.rows(), nc = a.cols();
  Rng rng(seed);

  // ceil(log2 k) informative vectors plus the leading one, which keeps
  // disconnected components apart.
  const auto ell = static_cast<Eigen::Index>(std::ceil(std::log2(static_cast<double>(p.k))));
  const Svd svd = thin_svd(g.scaled);
  const Eigen::Index dims = std::min<Eigen::Index>(ell + 1, svd.u.cols());
  Matrix z(n + nc, dims);
  z.topRows(n) = BipartiteGraph::inv_sqrt(g.row_degree).asDiagonal() * svd.u.leftCols(dims);
  z.bottomRows(nc) = BipartiteGraph::inv_sqrt(g.col_degree).asDiagonal() * svd.v.leftCols(dims);

  std::vector<std::size_t> labels = kmeans(z, static_cast<std::size_t>(p.k), rng);
  std::size_t k = 0;
  for (auto l : labels) k = std::max(k, l + 1);

  std::vector<std::size_t> nrows(k, 0), ncols(k, 0);
  Matrix centers = Matrix::Zero(static_cast<Eigen::Index>(k), dims);
  std::vector<std::size_t> count(k, 0);
  for (Eigen::Index v = 0; v < n + nc; ++v) {
    (v < n ? nrows : ncols)[labels[v]]++;
    centers.row(labels[v]) += z.row(v);
    ++count[labels[v]];
  }
  std::vector<std::size_t> valid;
  for (std::size_t c = 0; c < k; ++c) {
    centers.row(c) /= static_cast<double>(count[c]);
    if (nrows[c] > 0 && ncols[c] > 0) valid.push_back(c);
  }

  std::vector<Bicluster> out;
  if (valid.empty()) {
    out.push_back(full_bicluster(m.rows(), m.cols()));
  } else {
    std::vector<std::size_t> target(k);
    for (std::size_t c = 0; c < k; ++c) {
      target[c] = c;
      if (nrows[c] > 0 && ncols[c] > 0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (auto v : valid) {
        const double d = (centers.row(c) - centers.row(v)).squaredNorm();
        if (d < best) {
          best = d;
          target[c] = v;
        }
      }
    }
    out.resize(k);
    for (Eigen::Index v = 0; v < n + nc; ++v) {
      auto& b = out[target[labels[v]]];
      if (v < n) {
        b.rows.push_back(static_cast<std::size_t>(v));
      } else {
        b.cols.push_back(static_cast<std::size_t>(v - n));
      }
    }
    std::erase_if(out, [](const Bicluster& b) { return b.rows.empty(); });
  }
  return make_set("bsgp", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
