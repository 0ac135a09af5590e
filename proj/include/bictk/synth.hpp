#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "validation.hpp"

namespace bictk::synth {

enum class PlantKind { constant, additive, multiplicative, checkerboard };

inline const char* to_string(PlantKind k) {
  switch (k) {
    case PlantKind::constant: return "constant";
    case PlantKind::additive: return "additive";
    case PlantKind::multiplicative: return "multiplicative";
    case PlantKind::checkerboard: return "checkerboard";
  }
  return "?";
}

// One planted structure. Which fields apply depends on kind:
//   constant:       level on rows x cols
//   additive:       mu + row_effects[i] + col_effects[j] on rows x cols
//                   (effects drawn N(0, effect_sd^2) when left empty)
//   multiplicative: u[i] * v[j] on rows x cols (drawn N(0,1) when empty)
//   checkerboard:   block_levels[row_labels[i]][col_labels[j]] over the
//                   whole matrix; every block becomes a ground-truth bicluster
struct Plant {
  PlantKind kind = PlantKind::constant;
  IndexList rows, cols;
  double level = 0.0;
  double mu = 0.0;
  std::vector<double> row_effects, col_effects;
  double effect_sd = 1.0;
  std::vector<double> u, v;
  std::vector<std::size_t> row_labels, col_labels;
  std::vector<std::vector<double>> block_levels;
};

struct PlantedSpec {
  std::size_t rows = 0, cols = 0;
  double noise_sd = 1.0;
  double background_mean = 0.0;
  // When false, cells covered by a non-checkerboard plant carry only the
  // plant signal (background noise is not added there).
  bool noise_on_plants = true;
  std::vector<Plant> plants;
};

inline IndexList index_range(std::size_t first, std::size_t count) {
  IndexList v(count);
  for (std::size_t k = 0; k < count; ++k) v[k] = first + k;
  return v;
}

inline Plant constant_plant(IndexList rows, IndexList cols, double level) {
  Plant p;
  p.kind = PlantKind::constant;
  p.rows = std::move(rows);
  p.cols = std::move(cols);
  p.level = level;
  return p;
}

inline Plant additive_plant(IndexList rows, IndexList cols, double mu, double effect_sd = 1.0) {
  Plant p;
  p.kind = PlantKind::additive;
  p.rows = std::move(rows);
  p.cols = std::move(cols);
  p.mu = mu;
  p.effect_sd = effect_sd;
  return p;
}

inline Plant checkerboard_plant(std::vector<std::size_t> row_labels,
                                std::vector<std::size_t> col_labels,
                                std::vector<std::vector<double>> levels) {
  Plant p;
  p.kind = PlantKind::checkerboard;
  p.row_labels = std::move(row_labels);
  p.col_labels = std::move(col_labels);
  p.block_levels = std::move(levels);
  return p;
}

namespace detail {

inline void validate_spec(const PlantedSpec& s) {
  if (s.rows == 0 || s.cols == 0) throw SpecError("shape must be at least 1x1");
  if (!(s.noise_sd >= 0)) throw SpecError("noise_sd must be >= 0");
  bool has_board = false, has_other = false;
  for (const auto& p : s.plants) {
    if (p.kind == PlantKind::checkerboard) {
      if (has_board) throw SpecError("at most one checkerboard plant");
      has_board = true;
      if (p.row_labels.size() != s.rows || p.col_labels.size() != s.cols)
        throw SpecError("checkerboard labels must cover every row and column");
      std::size_t kr = 0, kc = 0;
      for (auto l : p.row_labels) kr = std::max(kr, l + 1);
      for (auto l : p.col_labels) kc = std::max(kc, l + 1);
      if (p.block_levels.size() != kr)
        throw SpecError("checkerboard block_levels needs one row per row cluster");
      for (const auto& row : p.block_levels)
        if (row.size() != kc)
          throw SpecError("checkerboard block_levels needs one entry per column cluster");
      continue;
    }
    has_other = true;
    Bicluster b = make_bicluster(p.rows, p.cols);
    if (b.rows.size() != p.rows.size() || b.cols.size() != p.cols.size())
      throw SpecError("plant lists an index twice");
    try {
      validate_bicluster(b, s.rows, s.cols);
    } catch (const ValidationError& e) {
      throw SpecError(std::string("plant indices: ") + e.what());
    }
    if (p.kind == PlantKind::additive) {
      if (!p.row_effects.empty() && p.row_effects.size() != p.rows.size())
        throw SpecError("additive plant row_effects size mismatch");
      if (!p.col_effects.empty() && p.col_effects.size() != p.cols.size())
        throw SpecError("additive plant col_effects size mismatch");
    }
    if (p.kind == PlantKind::multiplicative) {
      if (!p.u.empty() && p.u.size() != p.rows.size())
        throw SpecError("multiplicative plant u size mismatch");
      if (!p.v.empty() && p.v.size() != p.cols.size())
        throw SpecError("multiplicative plant v size mismatch");
    }
  }
  if (has_board && has_other)
    throw SpecError("a checkerboard plant cannot be combined with other plant kinds");
}

}  // namespace detail

struct Generated {
  ExpressionMatrix matrix;
  BiclusterSet truth;
};

// Background N(background_mean, noise_sd^2) plus superposed plant signals.
inline Generated generate(const PlantedSpec& spec, std::uint64_t seed) {
  detail::validate_spec(spec);
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(spec.rows);
  const auto m = static_cast<Eigen::Index>(spec.cols);
  Matrix noise(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) noise(i, j) = spec.noise_sd * rng.normal();

  Matrix signal = Matrix::Zero(n, m);
  MissingMask covered = MissingMask::Constant(n, m, false);
  BiclusterSet truth;
  truth.algorithm = "planted";
  truth.seed = seed;

  for (const auto& p : spec.plants) {
    if (p.kind == PlantKind::checkerboard) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
          signal(i, j) += p.block_levels[p.row_labels[i]][p.col_labels[j]];
      const std::size_t kr = p.block_levels.size(), kc = p.block_levels[0].size();
      for (std::size_t a = 0; a < kr; ++a) {
        for (std::size_t b = 0; b < kc; ++b) {
          Bicluster bc;
          for (std::size_t i = 0; i < spec.rows; ++i)
            if (p.row_labels[i] == a) bc.rows.push_back(i);
          for (std::size_t j = 0; j < spec.cols; ++j)
            if (p.col_labels[j] == b) bc.cols.push_back(j);
          if (!bc.rows.empty() && !bc.cols.empty()) truth.biclusters.push_back(std::move(bc));
        }
      }
      continue;
    }
    std::vector<double> a(p.rows.size(), 0.0), b(p.cols.size(), 0.0);
    if (p.kind == PlantKind::additive) {
      a = p.row_effects;
      b = p.col_effects;
      if (a.empty()) {
        a.resize(p.rows.size());
        for (auto& x : a) x = p.effect_sd * rng.normal();
      }
      if (b.empty()) {
        b.resize(p.cols.size());
        for (auto& x : b) x = p.effect_sd * rng.normal();
      }
    } else if (p.kind == PlantKind::multiplicative) {
      a = p.u;
      b = p.v;
      if (a.empty()) {
        a.resize(p.rows.size());
        for (auto& x : a) x = rng.normal();
      }
      if (b.empty()) {
        b.resize(p.cols.size());
        for (auto& x : b) x = rng.normal();
      }
    }
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      for (std::size_t c = 0; c < p.cols.size(); ++c) {
        double value = 0.0;
        switch (p.kind) {
          case PlantKind::constant: value = p.level; break;
          case PlantKind::additive: value = p.mu + a[r] + b[c]; break;
          case PlantKind::multiplicative: value = a[r] * b[c]; break;
          case PlantKind::checkerboard: break;
        }
        signal(p.rows[r], p.cols[c]) += value;
        covered(p.rows[r], p.cols[c]) = true;
      }
    }
    truth.biclusters.push_back(make_bicluster(p.rows, p.cols));
  }

  Matrix values = signal.array() + spec.background_mean;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (spec.noise_on_plants || !covered(i, j)) values(i, j) += noise(i, j);

  return {ExpressionMatrix::from_values(std::move(values)), std::move(truth)};
}

struct Recovery {
  double recovery = 0.0;   // mean over truth of best Jaccard against found
  double relevance = 0.0;  // mean over found of best Jaccard against truth
};

inline Recovery recovery_score(const BiclusterSet& found, const BiclusterSet& truth) {
  Recovery r;
  if (!truth.biclusters.empty() && !found.biclusters.empty()) {
    r.recovery = compare_sets(truth, found).best_match_mean;
    r.relevance = compare_sets(found, truth).best_match_mean;
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON form of a PlantedSpec (used by the `synth` subcommand).

inline PlantedSpec spec_from_json(const Json& j) {
  try {
    PlantedSpec s;
    s.rows = j.at("rows").get<std::size_t>();
    s.cols = j.at("cols").get<std::size_t>();
    s.noise_sd = j.value("noise_sd", 1.0);
    s.background_mean = j.value("background_mean", 0.0);
    s.noise_on_plants = j.value("noise_on_plants", true);
    for (const auto& jp : j.value("plants", Json::array())) {
      Plant p;
      const auto kind = jp.at("kind").get<std::string>();
      if (kind == "constant") {
        p.kind = PlantKind::constant;
      } else if (kind == "additive") {
        p.kind = PlantKind::additive;
      } else if (kind == "multiplicative") {
        p.kind = PlantKind::multiplicative;
      } else if (kind == "checkerboard") {
        p.kind = PlantKind::checkerboard;
      } else {
        throw SpecError("unknown plant kind '" + kind + "'");
      }
      p.rows = jp.value("rows", IndexList{});
      p.cols = jp.value("cols", IndexList{});
      p.level = jp.value("level", 0.0);
      p.mu = jp.value("mu", 0.0);
      p.effect_sd = jp.value("effect_sd", 1.0);
      p.row_effects = jp.value("row_effects", std::vector<double>{});
      p.col_effects = jp.value("col_effects", std::vector<double>{});
      p.u = jp.value("u", std::vector<double>{});
      p.v = jp.value("v", std::vector<double>{});
      p.row_labels = jp.value("row_labels", std::vector<std::size_t>{});
      p.col_labels = jp.value("col_labels", std::vector<std::size_t>{});
      p.block_levels = jp.value("block_levels", std::vector<std::vector<double>>{});
      s.plants.push_back(std::move(p));
    }
    detail::validate_spec(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed planted spec: ") + e.what());
  }
}

}  // namespace bictk::synth
