#pragma once

#include <algorithm>
#include <vector>

#include "common.hpp"

namespace bictk::algo {

struct FlocParams {
  long long k = 20;
  double delta = 1.0;
  double init_row_prob = 0.5;
  double init_col_prob = 0.5;
  long long max_iter = 50;

  static const Schema& schema() {
    static const Schema s = {
        int_param("k", 20, 1, "number of biclusters"),
        real_param("delta", 1.0, 0.0, false, "actions may not raise a cluster residue above this"),
        real_param("init_row_prob", 0.5, 0.0, true, "probability a row starts in a cluster", 1.0),
        real_param("init_col_prob", 0.5, 0.0, true, "probability a column starts in a cluster",
                   1.0),
        int_param("max_iter", 50, 1, "maximum number of iterations"),
    };
    return s;
  }
  Json to_json() const {
    return {{"k", k},
            {"delta", delta},
            {"init_row_prob", init_row_prob},
            {"init_col_prob", init_col_prob},
            {"max_iter", max_iter}};
  }
  static FlocParams from_json(const Json& j) {
    const Json r = resolve_params(schema(), j, "floc");
    return {r["k"].get<long long>(), r["delta"].get<double>(), r["init_row_prob"].get<double>(),
            r["init_col_prob"].get<double>(), r["max_iter"].get<long long>()};
  }
};

namespace detail {

// MSR of a[rows, cols] computed on values shifted by the first cell, so an
// exactly constant block scores exactly 0.
inline double floc_msr(const Matrix& a, const IndexList& rows, const IndexList& cols) {
  const std::size_t nr = rows.size(), nc = cols.size();
  const double ref = a(rows[0], cols[0]);
  std::vector<double> rm(nr, 0.0), cm(nc, 0.0);
  double total = 0.0;
  for (std::size_t p = 0; p < nr; ++p)
    for (std::size_t q = 0; q < nc; ++q) {
      const double v = a(rows[p], cols[q]) - ref;
      rm[p] += v;
      cm[q] += v;
      total += v;
    }
  for (auto& x : rm) x /= static_cast<double>(nc);
  for (auto& x : cm) x /= static_cast<double>(nr);
  const double mean = total / static_cast<double>(nr * nc);
  double s = 0.0;
  for (std::size_t p = 0; p < nr; ++p)
    for (std::size_t q = 0; q < nc; ++q) {
      const double r = a(rows[p], cols[q]) - ref - rm[p] - cm[q] + mean;
      s += r * r;
    }
  return s / static_cast<double>(nr * nc);
}

struct FlocCluster {
  IndexList rows, cols;
  double residue = 0.0;
};

struct FlocAction {
  std::size_t cluster = 0;
  bool row = true;
  std::size_t index = 0;
};

inline IndexList toggled(const IndexList& list, std::size_t x) {
  IndexList out;
  out.reserve(list.size() + 1);
  bool placed = false;
  for (auto v : list) {
    if (v == x) {
      placed = true;
      continue;
    }
    if (!placed && v > x) {
      out.push_back(x);
      placed = true;
    }
    out.push_back(v);
  }
  if (!placed) out.push_back(x);
  return out;
}

// Objective state: average residue first, then larger total volume.
struct FlocState {
  double residue_sum = 0.0;
  std::size_t volume = 0;
  bool better_than(const FlocState& o) const {
    if (residue_sum != o.residue_sum) return residue_sum < o.residue_sum;
    return volume > o.volume;
  }
};

inline FlocState floc_state(const std::vector<FlocCluster>& cs) {
  FlocState s;
  for (const auto& c : cs) {
    s.residue_sum += c.residue;
    s.volume += c.rows.size() * c.cols.size();
  }
  return s;
}

// Applies an action in place. Returns false (leaving `cs` untouched) when it
// would shrink a cluster below 2 rows or 2 columns, or push its residue
// above max(delta, current residue).
inline bool floc_apply(const Matrix& a, std::vector<FlocCluster>& cs, const FlocAction& act,
                       double delta) {
  FlocCluster& c = cs[act.cluster];
  IndexList next = toggled(act.row ? c.rows : c.cols, act.index);
  if (next.size() < 2) return false;
  const double r = act.row ? floc_msr(a, next, c.cols) : floc_msr(a, c.rows, next);
  if (r > std::max(delta, c.residue)) return false;
  c.residue = r;
  (act.row ? c.rows : c.cols) = std::move(next);
  return true;
}

// Objective after a hypothetical action, or nullopt when not allowed.
inline std::optional<FlocState> floc_probe(const Matrix& a, const std::vector<FlocCluster>& cs,
                                           const FlocAction& act,
                                           double delta) {
  const FlocCluster& c = cs[act.cluster];
  const IndexList next = toggled(act.row ? c.rows : c.cols, act.index);
  if (next.size() < 2) return std::nullopt;
  const double r = act.row ? floc_msr(a, next, c.cols) : floc_msr(a, c.rows, next);
  if (r > std::max(delta, c.residue)) return std::nullopt;
  // Summed in cluster order so the result matches floc_state bit for bit.
  FlocState s;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (k == act.cluster) {
      s.residue_sum += r;
      s.volume += act.row ? next.size() * c.cols.size() : c.rows.size() * next.size();
    } else {
      s.residue_sum += cs[k].residue;
      s.volume += cs[k].rows.size() * cs[k].cols.size();
    }
  }
  return s;
}

}  // namespace detail

// FLOC: k clusters start from random row/column memberships. Each iteration
// takes the best action (toggle in one of the k clusters) for every row and
// column, performs them in a random order, and keeps the best prefix. When no
// prefix improves, the single best action is taken instead; the search stops
// when no single action lowers the average residue (ties broken towards
// larger clusters) or at max_iter.
inline BiclusterSet run_floc(const ExpressionMatrix& m, const FlocParams& params,
                             std::uint64_t seed, const TraceHook& trace = {}) {
  const FlocParams p = FlocParams::from_json(params.to_json());
  m.require_complete();
  const Matrix& a = m.values();
  const std::size_t n = m.rows(), ncols = m.cols();
  if (n < 2 || ncols < 2) throw DomainError("floc needs at least 2 rows and 2 columns");
  Rng rng(seed);

  std::vector<detail::FlocCluster> cs(static_cast<std::size_t>(p.k));
  for (auto& c : cs) {
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(p.init_row_prob)) c.rows.push_back(i);
    for (std::size_t j = 0; j < ncols; ++j)
      if (rng.bernoulli(p.init_col_prob)) c.cols.push_back(j);
    while (c.rows.size() < 2) {
      const std::size_t i = rng.index(n);
      if (!std::binary_search(c.rows.begin(), c.rows.end(), i)) c.rows = detail::toggled(c.rows, i);
    }
    while (c.cols.size() < 2) {
      const std::size_t j = rng.index(ncols);
      if (!std::binary_search(c.cols.begin(), c.cols.end(), j)) c.cols = detail::toggled(c.cols, j);
    }
    c.residue = detail::floc_msr(a, c.rows, c.cols);
  }

  const auto all_actions_for = [&](bool row, std::size_t x) {
    std::vector<detail::FlocAction> acts;
    for (std::size_t c = 0; c < cs.size(); ++c) acts.push_back({c, row, x});
    return acts;
  };

  for (long long it = 0; it < p.max_iter; ++it) {
    const detail::FlocState start = detail::floc_state(cs);

    // Best action per row and per column against the current clustering.
    std::vector<detail::FlocAction> batch;
    for (int pass = 0; pass < 2; ++pass) {
      const bool row = pass == 0;
      for (std::size_t x = 0; x < (row ? n : ncols); ++x) {
        std::optional<detail::FlocState> best_state;
        detail::FlocAction best{};
        for (const auto& act : all_actions_for(row, x)) {
          const auto s = detail::floc_probe(a, cs, act, p.delta);
          if (s && (!best_state || s->better_than(*best_state))) {
            best_state = s;
            best = act;
          }
        }
        if (best_state) batch.push_back(best);
      }
    }
    rng.shuffle(batch);

    std::vector<detail::FlocCluster> work = cs, best_cs = cs;
    detail::FlocState best = start;
    for (const auto& act : batch) {
      if (!detail::floc_apply(a, work, act, p.delta)) continue;
      const auto s = detail::floc_state(work);
      if (s.better_than(best)) {
        best = s;
        best_cs = work;
      }
    }

    if (best.better_than(start)) {
      cs = std::move(best_cs);
    } else {
      std::optional<detail::FlocAction> single;
      detail::FlocState single_state = start;
      for (std::size_t c = 0; c < cs.size(); ++c)
        for (int pass = 0; pass < 2; ++pass)
          for (std::size_t x = 0; x < (pass == 0 ? n : ncols); ++x) {
            const detail::FlocAction act{c, pass == 0, x};
            const auto s = detail::floc_probe(a, cs, act, p.delta);
            if (s && s->better_than(single_state)) {
              single_state = *s;
              single = act;
            }
          }
      if (!single) {
        if (trace) trace(static_cast<int>(it), start.residue_sum / static_cast<double>(cs.size()));
        break;
      }
      detail::floc_apply(a, cs, *single, p.delta);
    }
    if (trace)
      trace(static_cast<int>(it),
            detail::floc_state(cs).residue_sum / static_cast<double>(cs.size()));
  }

  std::vector<Bicluster> out;
  for (const auto& c : cs) {
    Bicluster b{c.rows, c.cols, {}};
    b.score = msr(extract_submatrix(a, b));
    out.push_back(std::move(b));
  }
  return make_set("floc", p.to_json(), seed, std::move(out));
}

}  // namespace bictk::algo
