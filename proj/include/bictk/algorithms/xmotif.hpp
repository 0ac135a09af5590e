#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct XMotifParams {
  long long n_seeds = 10;
  long long n_determinants = 100;
  long long determinant_size = 7;
  double alpha = 0.05;
  long long max_motifs = 100;

  static const Schema& schema() {
    static const Schema s = {
        int_param("n_seeds", 10, 1, "seed columns tried per motif"),
        int_param("n_determinants", 100, 1, "determinant sets tried per seed"),
        int_param("determinant_size", 7, 1, "columns in each determinant set"),
        real_param("alpha", 0.05, 0.0, true, "minimum fraction of columns in a motif", 1.0, true),
        int_param("max_motifs", 100, 1, "maximum number of motifs"),
    };
    return s;
  }
  Json to_json() const {
    return {{"n_seeds", n_seeds},
            {"n_determinants", n_determinants},
            {"determinant_size", determinant_size},
            {"alpha", alpha},
            {"max_motifs", max_motifs}};
  }
  static XMotifParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "xmotif");
    return {r["n_seeds"].get<long long>(), r["n_determinants"].get<long long>(),
            r["determinant_size"].get<long long>(), r["alpha"].get<double>(),
            r["max_motifs"].get<long long>()};
  }
};

// Conserved gene expression motifs on a discretized matrix. For a seed
// column c and a random determinant set D, the motif rows are those whose
// level is the same on c and every column of D; the motif columns are those
// where every motif row keeps its level at c. The largest motif (by rows)
// over all seeds and determinants with at least alpha * |J| columns is kept,
// its rows are removed, and the search repeats.
inline BiclusterSet run_xmotif(const ExpressionMatrix& m, const XMotifParams& params,
                               std::uint64_t seed) {
  const XMotifParams p = XMotifParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  if (!is_integer_valued(a)) {
    throw DomainError("xmotif requires integer expression levels; run the discretize step first");
  }
  const std::size_t nc = m.cols();
  const double min_cols = p.alpha * static_cast<double>(nc);
  const std::size_t dsize = std::min<std::size_t>(static_cast<std::size_t>(p.determinant_size),
                                                  nc > 0 ? nc - 1 : 0);
  Rng rng(seed);

  std::vector<char> alive(m.rows(), 1);
  std::vector<Bicluster> out;
  for (long long round = 0; round < p.max_motifs; ++round) {
    IndexList remaining;
    for (std::size_t i = 0; i < alive.size(); ++i)
      if (alive[i]) remaining.push_back(i);
    if (remaining.size() < 2) break;

    std::optional<Bicluster> best;
    for (long long s = 0; s < p.n_seeds; ++s) {
      const std::size_t c = rng.index(nc);
      for (long long d = 0; d < p.n_determinants; ++d) {
        IndexList det;
        for (auto k : rng.sample(nc - 1, dsize)) det.push_back(k < c ? k : k + 1);
        IndexList rows;
        for (auto i : remaining) {
          const bool same = std::all_of(det.begin(), det.end(),
                                        [&](std::size_t j) { return a(i, j) == a(i, c); });
          if (same) rows.push_back(i);
        }
        if (rows.size() < 2 || (best && rows.size() < best->rows.size())) continue;
        IndexList cols;
        for (std::size_t j = 0; j < nc; ++j) {
          const bool same =
              std::all_of(rows.begin(), rows.end(), [&](std::size_t i) { return a(i, j) == a(i, c); });
          if (same) cols.push_back(j);
        }
        if (static_cast<double>(cols.size()) < min_cols) continue;
        if (best && rows.size() == best->rows.size() && cols.size() <= best->cols.size()) continue;
        best = Bicluster{std::move(rows), std::move(cols), {}};
      }
    }
    if (!best) break;
    for (auto i : best->rows) alive[i] = 0;
    best->score = static_cast<double>(best->rows.size());
    out.push_back(std::move(*best));
  }
  return make_set("xmotif", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
