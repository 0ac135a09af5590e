#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct PlaidParams {
  long long max_layers = 5;
  long long backfit_iter = 10;
  long long min_layer_rows = 2;
  long long min_layer_cols = 2;
  double release_threshold = 0.5;
  long long shuffles = 19;

  static const Schema& schema() {
    static const Schema s = {
        int_param("max_layers", 5, 0, "maximum number of layers"),
        int_param("backfit_iter", 10, 0, "backfitting sweeps after each new layer"),
        int_param("min_layer_rows", 2, 1, "minimum rows in a layer"),
        int_param("min_layer_cols", 2, 1, "minimum columns in a layer"),
        real_param("release_threshold", 0.5, 0.0, false, "membership cut-off for rows and columns",
                   1.0),
        int_param("shuffles", 19, 1, "row-shuffled fits a layer must beat"),
    };
    return s;
  }
  Json to_json() const {
    return {{"max_layers", max_layers},         {"backfit_iter", backfit_iter},
            {"min_layer_rows", min_layer_rows}, {"min_layer_cols", min_layer_cols},
            {"release_threshold", release_threshold}, {"shuffles", shuffles}};
  }
  static PlaidParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "plaid");
    return {r["max_layers"].get<long long>(),     r["backfit_iter"].get<long long>(),
            r["min_layer_rows"].get<long long>(), r["min_layer_cols"].get<long long>(),
            r["release_threshold"].get<double>(), r["shuffles"].get<long long>()};
  }
};

// theta_ij = mu + alpha_i + beta_j on rows x cols.
struct PlaidLayer {
  IndexList rows, cols;
  double mu = 0.0;
  Vector alpha, beta;  // aligned with rows / cols

  // Two-way additive fit of z restricted to rows x cols.
  static PlaidLayer fit(const Matrix& z, IndexList rows, IndexList cols) {
    PlaidLayer l;
    l.rows = std::move(rows);
    l.cols = std::move(cols);
    const auto nr = static_cast<Eigen::Index>(l.rows.size());
    const auto nc = static_cast<Eigen::Index>(l.cols.size());
    l.alpha = Vector::Zero(nr);
    l.beta = Vector::Zero(nc);
    if (nr == 0 || nc == 0) return l;
    for (Eigen::Index p = 0; p < nr; ++p)
      for (Eigen::Index q = 0; q < nc; ++q) {
        const double v = z(l.rows[p], l.cols[q]);
        l.alpha(p) += v;
        l.beta(q) += v;
      }
    l.mu = l.alpha.sum() / static_cast<double>(nr * nc);
    l.alpha = (l.alpha / static_cast<double>(nc)).array() - l.mu;
    l.beta = (l.beta / static_cast<double>(nr)).array() - l.mu;
    return l;
  }

  void add_to(Matrix& x, double sign) const {
    for (std::size_t p = 0; p < rows.size(); ++p)
      for (std::size_t q = 0; q < cols.size(); ++q)
        x(rows[p], cols[q]) += sign * (mu + alpha(p) + beta(q));
  }

  double sum_of_squares() const {
    double s = 0.0;
    for (std::size_t p = 0; p < rows.size(); ++p)
      for (std::size_t q = 0; q < cols.size(); ++q) {
        const double t = mu + alpha(p) + beta(q);
        s += t * t;
      }
    return s;
  }
};

namespace detail {

inline IndexList top_loadings(const Vector& u) {
  const double peak = u.cwiseAbs().maxCoeff();
  IndexList out;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (peak > 0 && std::abs(u(i)) >= 0.5 * peak) out.push_back(static_cast<std::size_t>(i));
  return out;
}

// Least-squares membership of each row given the layer's column effects,
// released at the threshold.
inline IndexList plaid_rows(const Matrix& z, const PlaidLayer& l, double threshold) {
  IndexList out;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto it = std::find(l.rows.begin(), l.rows.end(), static_cast<std::size_t>(i));
    const double a = it == l.rows.end() ? 0.0 : l.alpha(it - l.rows.begin());
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < l.cols.size(); ++q) {
      const double t = l.mu + a + l.beta(q);
      num += t * z(i, l.cols[q]);
      den += t * t;
    }
    const double rho = den > 0 ? std::clamp(num / den, 0.0, 1.0) : 0.0;
    if (rho > threshold) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

inline IndexList plaid_cols(const Matrix& z, const PlaidLayer& l, double threshold) {
  PlaidLayer t;
  t.rows = l.cols;
  t.cols = l.rows;
  t.mu = l.mu;
  t.alpha = l.beta;
  t.beta = l.alpha;
  return plaid_rows(z.transpose(), t, threshold);
}

// One layer searched on the residual z: start from the leading singular
// pair, then alternate binary least-squares membership updates.
inline std::optional<PlaidLayer> plaid_search(const Matrix& z, const PlaidParams& p) {
  const Svd svd = thin_svd(z);
  if (svd.sigma.size() == 0 || !(svd.sigma(0) > 0)) return std::nullopt;
  IndexList rows = top_loadings(svd.u.col(0));
  IndexList cols = top_loadings(svd.v.col(0));
  constexpr int kMaxCycles = 50;
  for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
    if (rows.empty() || cols.empty()) return std::nullopt;
    const PlaidLayer l = PlaidLayer::fit(z, rows, cols);
    IndexList next_rows = plaid_rows(z, l, p.release_threshold);
    if (next_rows.empty()) return std::nullopt;
    const PlaidLayer lr = PlaidLayer::fit(z, next_rows, cols);
    IndexList next_cols = plaid_cols(z, lr, p.release_threshold);
    if (next_rows == rows && next_cols == cols) break;
    rows = std::move(next_rows);
    cols = std::move(next_cols);
  }
  if (rows.size() < static_cast<std::size_t>(p.min_layer_rows) ||
      cols.size() < static_cast<std::size_t>(p.min_layer_cols))
    return std::nullopt;
  return PlaidLayer::fit(z, rows, cols);
}

}  // namespace detail

struct PlaidFit {
  double background = 0.0;
  std::vector<PlaidLayer> layers;
  double rss = 0.0;
};

// Plaid model: global background plus additive layers found one at a time on
// the residual. A layer is kept only when its sum of squares beats every fit
// on row-shuffled copies of the residual and it lowers the residual sum of
// squares; all layers are backfitted after each addition.
inline PlaidFit fit_plaid(const Matrix& a, const PlaidParams& p, std::uint64_t seed) {
  Rng rng(seed);
  PlaidFit fit;
  fit.background = a.mean();
  Matrix resid = a.array() - fit.background;
  fit.rss = resid.squaredNorm();
  const double total = fit.rss;

  for (long long k = 0; k < p.max_layers; ++k) {
    if (fit.rss <= 1e-10 * std::max(total, 1e-300)) break;
    auto layer = detail::plaid_search(resid, p);
    if (!layer) break;
    const double ss = layer->sum_of_squares();
    bool significant = true;
    for (long long s = 0; s < p.shuffles && significant; ++s) {
      Matrix shuffled = resid;
      for (Eigen::Index i = 0; i < shuffled.rows(); ++i) {
        std::vector<double> row(shuffled.cols());
        for (Eigen::Index j = 0; j < shuffled.cols(); ++j) row[j] = shuffled(i, j);
        rng.shuffle(row);
        for (Eigen::Index j = 0; j < shuffled.cols(); ++j) shuffled(i, j) = row[j];
      }
      const auto null_layer = detail::plaid_search(shuffled, p);
      if (null_layer && null_layer->sum_of_squares() >= ss) significant = false;
    }
    if (!significant) break;

    std::vector<PlaidLayer> layers = fit.layers;
    layers.push_back(*layer);
    double background = fit.background;
    for (long long sweep = 0; sweep < std::max<long long>(p.backfit_iter, 1); ++sweep) {
      for (auto& l : layers) {
        Matrix partial = a.array() - background;
        for (const auto& o : layers)
          if (&o != &l) o.add_to(partial, -1.0);
        l = PlaidLayer::fit(partial, l.rows, l.cols);
      }
      Matrix rest = a;
      for (const auto& l : layers) l.add_to(rest, -1.0);
      background = rest.mean();
    }
    Matrix next = a.array() - background;
    for (const auto& l : layers) l.add_to(next, -1.0);
    const double rss = next.squaredNorm();
    if (!(rss < fit.rss)) break;
    fit.layers = std::move(layers);
    fit.background = background;
    fit.rss = rss;
    resid = std::move(next);
  }
  return fit;
}

inline BiclusterSet run_plaid(const ExpressionMatrix& m, const PlaidParams& params,
                              std::uint64_t seed) {
  const PlaidParams p = PlaidParams::from_json(params.to_json());
  m.require_complete();
  const PlaidFit fit = fit_plaid(m.values(), p, seed);
  std::vector<Bicluster> out;
  for (const auto& l : fit.layers) out.push_back(Bicluster{l.rows, l.cols, l.sum_of_squares()});
  Json echo = p.to_json();
  echo["background"] = fit.background;
  echo["residual_ss"] = fit.rss;
  return make_set("plaid", std::move(echo), seed, std::move(out));
}

}  // namespace bictk::algo
