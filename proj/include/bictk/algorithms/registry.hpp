#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bimax.hpp"
#include "bsgp.hpp"
#include "cc.hpp"
#include "floc.hpp"
#include "isa.hpp"
#include "itl.hpp"
#include "kspectral.hpp"
#include "las.hpp"
#include "msvd.hpp"
#include "opsm.hpp"
#include "plaid.hpp"
#include "xmotif.hpp"

namespace bictk::algo {

struct AlgorithmInfo {
  std::string name;
  std::string description;
  const Schema& (*schema)();
  std::function<BiclusterSet(const ExpressionMatrix&, const Json&, std::uint64_t)> run;
  std::function<Json(const Json&)> resolve;  // throws ParameterError on bad params
};

namespace detail {

template <typename P, typename F>
AlgorithmInfo entry(std::string name, std::string description, F run) {
  return {std::move(name), std::move(description), &P::schema,
          [run](const ExpressionMatrix& m, const Json& params, std::uint64_t seed) {
            return run(m, P::from_json(params), seed);
          },
          [](const Json& params) { return P::from_json(params).to_json(); }};
}

}  // namespace detail

inline const std::vector<AlgorithmInfo>& registry() {
  static const std::vector<AlgorithmInfo> r = {
      detail::entry<CcParams>("cc", "Cheng-Church mean squared residue biclusters",
                              [](auto& m, auto p, auto s) { return run_cc(m, p, s); }),
      detail::entry<FlocParams>("floc", "FLOC move-based residue minimization",
                                [](auto& m, auto p, auto s) { return run_floc(m, p, s); }),
      detail::entry<BsgpParams>("bsgp", "bipartite spectral graph partitioning",
                                [](auto& m, auto p, auto s) { return run_bsgp(m, p, s); }),
      detail::entry<OpsmParams>("opsm", "order-preserving submatrices",
                                [](auto& m, auto p, auto s) { return run_opsm(m, p, s); }),
      detail::entry<IsaParams>("isa", "iterative signature algorithm",
                               [](auto& m, auto p, auto s) { return run_isa(m, p, s); }),
      detail::entry<KSpectralParams>("kspectral", "spectral checkerboard biclustering",
                                     [](auto& m, auto p, auto s) { return run_kspectral(m, p, s); }),
      detail::entry<ItlParams>("itl", "information-theoretic co-clustering",
                               [](auto& m, auto p, auto s) { return run_itl(m, p, s); }),
      detail::entry<XMotifParams>("xmotif", "conserved expression motifs",
                                  [](auto& m, auto p, auto s) { return run_xmotif(m, p, s); }),
      detail::entry<PlaidParams>("plaid", "plaid layer model",
                                 [](auto& m, auto p, auto s) { return run_plaid(m, p, s); }),
      detail::entry<BimaxParams>("bimax", "inclusion-maximal all-ones submatrices",
                                 [](auto& m, auto p, auto s) { return run_bimax(m, p, s); }),
      detail::entry<LasParams>("las", "large average submatrices",
                               [](auto& m, auto p, auto s) { return run_las(m, p, s); }),
      detail::entry<MsvdParams>("msvd", "block-wise singular value decomposition",
                                [](auto& m, auto p, auto s) { return run_msvd(m, p, s); }),
  };
  return r;
}

inline std::vector<std::string> algorithm_names() {
  std::vector<std::string> out;
  for (const auto& a : registry()) out.push_back(a.name);
  return out;
}

inline std::string joined_algorithm_names() {
  std::string out;
  for (const auto& n : algorithm_names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

inline const AlgorithmInfo* find_algorithm(const std::string& name) {
  for (const auto& a : registry())
    if (a.name == name) return &a;
  return nullptr;
}

inline const AlgorithmInfo& get_algorithm(const std::string& name) {
  const auto* a = find_algorithm(name);
  if (!a) {
    throw ParameterError("unknown algorithm '" + name + "' (valid: " + joined_algorithm_names() +
                         ")");
  }
  return *a;
}

// Resolved parameters (defaults filled in) for an algorithm.
inline Json resolved_params(const std::string& name, const Json& params) {
  return get_algorithm(name).resolve(params);
}

inline BiclusterSet run_algorithm(const std::string& name, const ExpressionMatrix& m,
                                  const Json& params, std::uint64_t seed) {
  return get_algorithm(name).run(m, params, seed);
}

// Machine-readable parameter schemas for every algorithm.
inline Json registry_json() {
  Json out = Json::array();
  for (const auto& a : registry()) {
    out.push_back({{"name", a.name},
                   {"description", a.description},
                   {"params", schema_to_json(a.schema())}});
  }
  return out;
}

}  // namespace bictk::algo
