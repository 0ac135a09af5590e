#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct LasParams {
  double score_threshold = 1.0;
  long long max_biclusters = 20;
  long long restarts = 1000;
  long long search_iter = 50;

  static const Schema& schema() {
    static const Schema s = {
        real_param("score_threshold", 1.0, std::nullopt, false, "stop below this significance"),
        int_param("max_biclusters", 20, 1, "maximum number of biclusters"),
        int_param("restarts", 1000, 1, "random restarts per bicluster"),
        int_param("search_iter", 50, 1, "alternating updates per restart"),
    };
    return s;
  }
  Json to_json() const {
    return {{"score_threshold", score_threshold},
            {"max_biclusters", max_biclusters},
            {"restarts", restarts},
            {"search_iter", search_iter}};
  }
  static LasParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "las");
    return {r["score_threshold"].get<double>(), r["max_biclusters"].get<long long>(),
            r["restarts"].get<long long>(), r["search_iter"].get<long long>()};
  }
};

// Significance of a k x l submatrix with average `avg` in an m x n matrix of
// noise level sigma: -log[C(m,k) C(n,l) Pr(N(0,1) > sqrt(kl) avg / sigma)].
struct LasScore {
  std::size_t m = 0, n = 0;
  double sigma = 1.0;

  static double log_choose(std::size_t a, std::size_t b) {
    return std::lgamma(static_cast<double>(a) + 1) - std::lgamma(static_cast<double>(b) + 1) -
           std::lgamma(static_cast<double>(a - b) + 1);
  }

  static double log_upper_tail(double x) {
    if (x < 30.0) return std::log(0.5 * std::erfc(x / std::sqrt(2.0)));
    // Asymptotic expansion; erfc underflows this far out.
    const double x2 = x * x;
    return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * M_PI) +
           std::log(1.0 - 1.0 / x2 + 3.0 / (x2 * x2));
  }

  double operator()(std::size_t k, std::size_t l, double avg) const {
    const double z = std::sqrt(static_cast<double>(k * l)) * avg / sigma;
    return -(log_choose(m, k) + log_choose(n, l) + log_upper_tail(z));
  }
};

namespace detail {

struct LasCandidate {
  IndexList rows, cols;
  double score = -std::numeric_limits<double>::infinity();
};

// Best prefix of the entries sorted by their sums over the fixed side.
// `transpose` selects columns instead of rows. Returns the chosen set and
// its score.
inline std::pair<IndexList, double> las_best_prefix(const Matrix& z, const IndexList& fixed,
                                                    bool transpose, const LasScore& score) {
  const auto count = static_cast<std::size_t>(transpose ? z.cols() : z.rows());
  std::vector<double> sums(count, 0.0);
  for (std::size_t x = 0; x < count; ++x)
    for (auto f : fixed) sums[x] += transpose ? z(f, x) : z(x, f);
  IndexList order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return sums[p] > sums[q]; });
  double acc = 0.0, best = -std::numeric_limits<double>::infinity();
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= count; ++k) {
    acc += sums[order[k - 1]];
    const double avg = acc / static_cast<double>(k * fixed.size());
    const double s = transpose ? score(fixed.size(), k, avg) : score(k, fixed.size(), avg);
    if (s > best) {
      best = s;
      best_k = k;
    }
  }
  IndexList chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_k));
  std::sort(chosen.begin(), chosen.end());
  return {chosen, best};
}

inline LasCandidate las_search(const Matrix& z, const LasScore& score, Rng& rng,
                               long long search_iter) {
  const auto nc = static_cast<std::size_t>(z.cols());
  const std::size_t start = 1 + rng.index(std::max<std::size_t>(1, nc / 2));
  IndexList cols = rng.sample(nc, start);
  std::sort(cols.begin(), cols.end());
  LasCandidate c;
  for (long long it = 0; it < search_iter; ++it) {
    auto [rows, s1] = las_best_prefix(z, cols, false, score);
    auto [next_cols, s2] = las_best_prefix(z, rows, true, score);
    const bool same = rows == c.rows && next_cols == c.cols;
    c.rows = std::move(rows);
    c.cols = next_cols;
    c.score = s2;
    cols = std::move(next_cols);
    if (same) break;
  }
  return c;
}

}  // namespace detail

// Large average submatrices: each bicluster is the best of many random
// restarts of alternating row/column updates that maximize the significance
// score; after acceptance its average is subtracted from its cells. Stops
// when the best score falls below score_threshold.
inline BiclusterSet run_las(const ExpressionMatrix& m, const LasParams& params, std::uint64_t seed) {
  const LasParams p = LasParams::from_json(params.to_json());
  m.require_complete();
  Matrix z = m.values();
  Rng rng(seed);
  std::vector<Bicluster> out;
  for (long long b = 0; b < p.max_biclusters; ++b) {
    const double mu = z.mean();
    const double sd = std::sqrt((z.array() - mu).square().mean());
    if (!(sd > 0)) break;
    const LasScore score{m.rows(), m.cols(), sd};
    detail::LasCandidate best;
    for (long long r = 0; r < p.restarts; ++r) {
      auto c = detail::las_search(z, score, rng, p.search_iter);
      if (c.score > best.score) best = std::move(c);
    }
    if (!(best.score >= p.score_threshold)) break;
    double avg = 0.0;
    for (auto i : best.rows)
      for (auto j : best.cols) avg += z(i, j);
    avg /= static_cast<double>(best.rows.size() * best.cols.size());
    for (auto i : best.rows)
      for (auto j : best.cols) z(i, j) -= avg;
    out.push_back(Bicluster{best.rows, best.cols, best.score});
  }
  return make_set("las", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
