#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct OpsmParams {
  long long l = 10;
  long long max_cols = 0;

  static const Schema& schema() {
    static const Schema s = {
        int_param("l", 10, 1, "partial models kept at each size"),
        int_param("max_cols", 0, 0, "largest column order to grow (0 = all columns)"),
    };
    return s;
  }
  Json to_json() const { return {{"l", l}, {"max_cols", max_cols}}; }
  static OpsmParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "opsm");
    const OpsmParams p{r["l"].get<long long>(), r["max_cols"].get<long long>()};
    if (p.max_cols == 1) throw ParameterError("parameter 'max_cols' must be 0 or >= 2 (got 1)");
    return p;
  }
};

// An ordered column sequence and the rows strictly increasing along it.
struct PartialModel {
  IndexList order;
  IndexList support;
};

namespace detail {

inline bool increasing_along(const Matrix& a, std::size_t i, const IndexList& order) {
  for (std::size_t t = 1; t < order.size(); ++t)
    if (!(a(i, order[t - 1]) < a(i, order[t]))) return false;
  return true;
}

inline void keep_best(std::vector<PartialModel>& models, std::size_t l) {
  std::sort(models.begin(), models.end(), [](const PartialModel& x, const PartialModel& y) {
    if (x.support.size() != y.support.size()) return x.support.size() > y.support.size();
    return x.order < y.order;
  });
  if (models.size() > l) models.resize(l);
}

// -log of the Bonferroni-corrected probability that `support` or more of n
// random rows are increasing along some order of `size` out of m columns.
inline double opsm_significance(std::size_t n, std::size_t m, std::size_t size,
                                std::size_t support) {
  const double log_p = -std::lgamma(static_cast<double>(size) + 1);  // 1 / size!
  const double log_q = std::log1p(-std::exp(log_p));
  double log_tail = -std::numeric_limits<double>::infinity();
  for (std::size_t k = support; k <= n; ++k) {
    const double t = std::lgamma(static_cast<double>(n) + 1) -
                     std::lgamma(static_cast<double>(k) + 1) -
                     std::lgamma(static_cast<double>(n - k) + 1) + static_cast<double>(k) * log_p +
                     static_cast<double>(n - k) * log_q;
    const double hi = std::max(log_tail, t);
    log_tail = hi + std::log(std::exp(log_tail - hi) + std::exp(t - hi));
  }
  const double log_orders = std::lgamma(static_cast<double>(m) + 1) -
                            std::lgamma(static_cast<double>(m - size) + 1);
  return -(log_orders + log_tail);
}

}  // namespace detail

// Order-preserving submatrices by beam search: start from all column pairs,
// grow each kept partial model by inserting one more column at any position,
// and keep the l models with the most supporting rows (at least 2) per size.
// Models of every size are then ranked by how unlikely their support is for
// random rows; the best l not contained in a better one become the
// biclusters. Their column orders are echoed in params["column_orders"] as
// labels.
inline BiclusterSet run_opsm(const ExpressionMatrix& m, const OpsmParams& params,
                             std::uint64_t seed) {
  const OpsmParams p = OpsmParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  const std::size_t n = m.rows(), nc = m.cols();
  const auto l = static_cast<std::size_t>(p.l);
  const std::size_t max_cols =
      p.max_cols == 0 ? nc : std::min(nc, static_cast<std::size_t>(p.max_cols));
  constexpr std::size_t kMinSupport = 2;

  Json echo = p.to_json();
  echo["column_orders"] = Json::array();
  if (nc < 2) return make_set("opsm", std::move(echo), seed, {});

  std::vector<PartialModel> level;
  for (std::size_t x = 0; x < nc; ++x)
    for (std::size_t y = 0; y < nc; ++y) {
      if (x == y) continue;
      PartialModel pm{{x, y}, {}};
      for (std::size_t i = 0; i < n; ++i)
        if (a(i, x) < a(i, y)) pm.support.push_back(i);
      if (pm.support.size() >= kMinSupport) level.push_back(std::move(pm));
    }
  detail::keep_best(level, l);

  std::vector<PartialModel> all = level;
  for (std::size_t size = 3; size <= max_cols && !level.empty(); ++size) {
    std::set<IndexList> seen;
    std::vector<PartialModel> next;
    for (const auto& pm : level) {
      std::vector<char> used(nc, 0);
      for (auto c : pm.order) used[c] = 1;
      for (std::size_t c = 0; c < nc; ++c) {
        if (used[c]) continue;
        for (std::size_t pos = 0; pos <= pm.order.size(); ++pos) {
          IndexList order = pm.order;
          order.insert(order.begin() + static_cast<std::ptrdiff_t>(pos), c);
          if (!seen.insert(order).second) continue;
          PartialModel cand{std::move(order), {}};
          for (auto i : pm.support)
            if (detail::increasing_along(a, i, cand.order)) cand.support.push_back(i);
          if (cand.support.size() >= kMinSupport) next.push_back(std::move(cand));
        }
      }
    }
    detail::keep_best(next, l);
    level = std::move(next);
    all.insert(all.end(), level.begin(), level.end());
  }

  std::vector<std::pair<double, const PartialModel*>> ranked;
  for (const auto& pm : all)
    ranked.push_back({detail::opsm_significance(n, nc, pm.order.size(), pm.support.size()), &pm});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });

  std::vector<Bicluster> out;
  for (const auto& [score, pm] : ranked) {
    if (out.size() >= l) break;
    Bicluster b = make_bicluster(pm->support, pm->order);
    b.score = score;
    const bool covered = std::any_of(out.begin(), out.end(), [&](const Bicluster& o) {
      return jaccard(o, b) > 0.9 ||
             (std::includes(o.rows.begin(), o.rows.end(), b.rows.begin(), b.rows.end()) &&
              std::includes(o.cols.begin(), o.cols.end(), b.cols.begin(), b.cols.end()));
    });
    if (covered) continue;
    Json names = Json::array();
    for (auto c : pm->order) names.push_back(m.col_ids()[c]);
    echo["column_orders"].push_back(std::move(names));
    out.push_back(std::move(b));
  }
  return make_set("opsm", std::move(echo), seed, std::move(out));
}

}  // namespace bictk::algo
