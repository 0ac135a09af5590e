// Acceptance runner: one PASS/FAIL/SKIP line per criterion.
//
//   bictk_acceptance            run everything
//   bictk_acceptance --only X   run one criterion (exit 0 pass, 1 fail, 77 skip)
//   bictk_acceptance --list     print criterion names

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <bictk/cli.hpp>
#include <bictk/service.hpp>
#include <httplib.h>

#include "scenarios.hpp"
#include "support.hpp"

using namespace bictk;
using scenarios::Trial;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& note) {
    notes.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + note);
    if (!ok) verdict = Verdict::fail;
  }
};

struct Criterion {
  std::string name;
  std::string summary;
  double time_limit_s;  // <= 0: none stated
  std::function<Outcome()> run;
};

// Runs `sc` over seeds 1..n and checks that at least `rate` of them pass.
void monte_carlo(Outcome& o, const std::string& label, const scenarios::Scenario& sc, int n, double rate) {
  int passed = 0;
  std::string first_failure;
  for (int s = 1; s <= n; ++s) {
    const Trial t = sc(static_cast<std::uint64_t>(s));
    if (t.pass) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = " (first miss: seed " + std::to_string(s) + ", " + t.detail + ")";
    }
  }
  const bool ok = passed >= static_cast<int>(std::ceil(rate * n - 1e-9));
  o.check(ok, label + ": " + std::to_string(passed) + "/" + std::to_string(n) + " seeds, need " +
                  scenarios::fmt("%.0f%%", rate * 100) + first_failure);
}

Outcome msr_oracle() {
  Outcome o;
  Rng rng(2024);
  double worst_additive = 0, worst_gap = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = 1 + rng.index(20), m = 1 + rng.index(15);
    Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::vector<double> r(n), c(m);
    for (auto& v : r) v = rng.uniform(-10, 10);
    for (auto& v : c) v = rng.uniform(-10, 10);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) a(i, j) = r[i] + c[j];
    worst_additive = std::max(worst_additive, msr(a));
  }
  for (int t = 0; t < 1000; ++t) {
    const Matrix x = testing_support::random_matrix(1 + rng.index(20), 1 + rng.index(15), rng, -5, 5);
    worst_gap = std::max(worst_gap, std::abs(msr(x) - testing_support::msr_oracle(x)));
  }
  o.check(worst_additive <= 1e-9, scenarios::fmt("additive: max msr %.2e (<= 1e-9)", worst_additive));
  o.check(worst_gap <= 1e-10, scenarios::fmt("random: max |msr - direct| %.2e (<= 1e-10)", worst_gap));
  return o;
}

Outcome index_examples() {
  Outcome o;
  using testing_support::from_rows;
  const auto near = [&](double got, double want, const std::string& what) {
    o.check(std::abs(got - want) <= 1e-12, what + scenarios::fmt(": %.15g (want %.15g)", got, want));
  };
  const auto m22 = from_rows({{1, 2}, {3, 5}});
  Matrix add(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) add(i, j) = 0.7 * i - 1.3 * j + 2;

  near(msr(Matrix::Constant(3, 4, 2.5)), 0, "msr constant");
  near(msr(add), 0, "msr additive");
  near(msr(m22.values()), 0.0625, "msr [[1,2],[3,5]]");
  near(constant_variance(Matrix::Constant(2, 3, 4.0)), 0, "constant variance constant");
  near(constant_variance(m22.values()), 2.1875, "constant variance [[1,2],[3,5]]");
  near(constant_variance(Matrix::Constant(1, 1, 9.0)), 0, "constant variance single cell");
  near(sign_variance(from_rows({{1, 2, 3}, {0, 5, 9}}).values()), 0, "sign variance increasing rows");
  near(sign_variance(from_rows({{1, 3, 2}, {0, 9, 5}, {4, 6, 5}}).values()), 0, "sign variance shared pattern");
  near(sign_variance(from_rows({{1, 2}, {2, 1}}).values()), 1, "sign variance [[1,2],[2,1]]");
  near(sign_variance(from_rows({{1}, {5}}).values()), 0, "sign variance one column");

  const auto b01 = make_bicluster({0, 1}, {0, 1}), b12 = make_bicluster({1, 2}, {0, 1});
  near(jaccard(b01, b01), 1, "jaccard identical");
  near(jaccard(b01, make_bicluster({2, 3}, {0, 1})), 0, "jaccard disjoint rows");
  near(jaccard(b01, b12), 1.0 / 3.0, "jaccard 2/6");

  near(hausdorff(m22.values(), m22.values()), 0, "hausdorff identical");
  near(hausdorff(Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 3.0)), 3, "hausdorff {0} vs {3}");
  near(hausdorff(from_rows({{0, 1}}).values(), from_rows({{0, 5}}).values()), 4, "hausdorff {0,1} vs {0,5}");

  Rng rng(3);
  const auto noise = testing_support::labeled(testing_support::random_matrix(5, 6, rng));
  near(sb_score(noise, make_bicluster({0, 1, 2, 3}, {0, 1, 2}), IndexList{0, 1, 2}).value, 0,
       "sb score identical condition sets");
  int positive = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng r(seed);
    Matrix x(6, 16);
    std::vector<double> base(8);
    for (auto& v : base) v = r.normal();
    for (int i = 0; i < 6; ++i) {
      const double scale = r.uniform(0.5, 2.0), shift = r.normal();
      for (int j = 0; j < 8; ++j) x(i, j) = shift + scale * base[j];
      for (int j = 8; j < 16; ++j) x(i, j) = r.normal();
    }
    if (sb_score(testing_support::labeled(x), make_bicluster(synth::index_range(0, 6), synth::index_range(0, 8))).value > 0)
      ++positive;
  }
  o.check(positive >= 95, "sb score correlated vs noise: " + std::to_string(positive) + "/100 positive (>= 95)");
  bool undefined = false;
  try {
    sb_score(from_rows({{1, 2, 3, 4}, {2, 3, 4, 5}}), make_bicluster({0}, {0, 1}));
  } catch (const UndefinedIndexError&) {
    undefined = true;
  }
  o.check(undefined, "sb score single gene is undefined");

  const auto m23 = from_rows({{1, 2, 7}, {3, 5, 7}});
  BiclusterSet s;
  s.biclusters = {make_bicluster({0, 1}, {2})};
  near(overall_mse(m23, s), 0, "overall mse constant bicluster");
  s.biclusters = {make_bicluster({0, 1}, {0, 1}), make_bicluster({0, 1}, {2})};
  near(overall_mse(m23, s), 0.03125, "overall mse 0.0625 and 0");
  s.biclusters.clear();
  bool empty_undefined = false;
  try {
    overall_mse(m23, s);
  } catch (const UndefinedIndexError&) {
    empty_undefined = true;
  }
  o.check(empty_undefined, "overall mse of empty set is undefined");
  return o;
}

Outcome bimax_oracle() {
  Outcome o;
  Rng rng(77);
  int equal = 0, modes_agree = 0;
  std::string first;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(13), m = 2 + rng.index(11);
    const Matrix e = scenarios::random_binary(n, m, 0.3, rng);
    const auto oracle = scenarios::bimax_brute_force(e, 2, 2);
    const auto ex = ExpressionMatrix::from_values(e);
    const auto run = [&](const char* mode) {
      return algo::run_bimax(ex, algo::BimaxParams::from_json({{"mode", mode}, {"max_biclusters", 1000000}}), 1);
    };
    const auto rec = run("recursive"), it = run("iterative");
    if (scenarios::sorted_cells(rec.biclusters) == oracle) {
      ++equal;
    } else if (first.empty()) {
      first = " (first mismatch: trial " + std::to_string(t) + ")";
    }
    if (scenarios::sorted_cells(it.biclusters) == scenarios::sorted_cells(rec.biclusters)) ++modes_agree;
  }
  o.check(equal == 100, "recursive equals brute force: " + std::to_string(equal) + "/100" + first);
  o.check(modes_agree == 100, "iterative equals recursive: " + std::to_string(modes_agree) + "/100");
  return o;
}

Outcome cc_contract_recovery() {
  Outcome o;
  Rng rng(31);
  int violations = 0, checked = 0;
  for (int t = 0; t < 50; ++t) {
    const auto n = 5 + rng.index(60), m = 3 + rng.index(20);
    const auto x = testing_support::labeled(testing_support::random_matrix(n, m, rng, -3, 3));
    const double delta = rng.uniform(0.0, 1.5);
    const auto r = algo::run_cc(x, algo::CcParams::from_json({{"delta", delta}, {"n", 5}}), t);
    for (const auto& b : r.biclusters) {
      ++checked;
      if (!(msr(x, b) <= delta)) ++violations;
    }
  }
  o.check(violations == 0, "delta contract: " + std::to_string(violations) + " violations in " +
                               std::to_string(checked) + " biclusters");
  monte_carlo(o, "planted 20x8 block, delta 0.5", scenarios::cc_planted, 50, 0.9);
  return o;
}

Outcome kspectral_checkerboard() {
  Outcome o;
  monte_carlo(o, "noiseless, exact partitions", [](std::uint64_t s) { return scenarios::kspectral_checkerboard(s, 0.0, 1.0); },
              20, 1.0);
  monte_carlo(o, "noise 0.1, label agreement >= 0.95",
              [](std::uint64_t s) { return scenarios::kspectral_checkerboard(s, 0.1, 0.95); }, 20, 1.0);
  return o;
}

Outcome plaid_self_consistency() {
  Outcome o;
  monte_carlo(o, "two noiseless layers: recovery >= 0.9, residual SS < 1e-6", scenarios::plaid_layers, 20, 1.0);
  return o;
}

Outcome planted_recovery() {
  Outcome o;
  monte_carlo(o, "las planted block, top jaccard >= 0.8", scenarios::las_planted, 20, 0.9);
  monte_carlo(o, "las pure noise, threshold 10, empty", scenarios::las_noise, 50, 0.9);
  monte_carlo(o, "isa planted block, jaccard >= 0.8", scenarios::isa_planted, 20, 0.9);
  monte_carlo(o, "isa pure noise, thresholds 4, empty", scenarios::isa_noise, 50, 0.95);
  monte_carlo(o, "xmotif planted motif, jaccard >= 0.8", scenarios::xmotif_planted, 20, 0.9);
  monte_carlo(o, "floc two planted blocks, jaccard >= 0.7 each", scenarios::floc_planted, 20, 0.9);
  monte_carlo(o, "opsm planted order, exhaustive oracle", scenarios::opsm_planted, 20, 0.9);
  monte_carlo(o, "itl block structure, MI within 1e-9", scenarios::itl_blocks, 20, 0.9);
  monte_carlo(o, "msvd rank-1 row groups", scenarios::msvd_rank1, 20, 0.9);
  return o;
}

Outcome bistochastization() {
  Outcome o;
  int converged = 0;
  double worst = 0;
  int most_iter = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    const Matrix x = testing_support::random_matrix(50, 30, rng, 0.01, 10.0);
    try {
      const auto r = preprocess::bistochastize_values(x, 1e-6, 1000);
      Eigen::VectorXd means(80);
      means << r.values.rowwise().mean(), r.values.colwise().mean().transpose();
      const double spread = std::max(means.maxCoeff() - means.minCoeff(), (means.array() - 1.0).abs().maxCoeff());
      worst = std::max(worst, spread);
      most_iter = std::max(most_iter, r.iterations);
      if (spread <= 1e-6 && r.iterations <= 1000) ++converged;
    } catch (const ConvergenceError&) {
    }
  }
  o.check(converged == 100, std::to_string(converged) + "/100 seeds converged; worst deviation of a mean from 1 or another mean " +
                                scenarios::fmt("%.2e", worst) + ", most iterations " + std::to_string(most_iter));
  return o;
}

Outcome determinism() {
  Outcome o;
  testing_support::TempDir dir("accept");
  service::ServiceConfig cfg;
  cfg.port = 0;
  cfg.worker_count = 2;
  cfg.data_dir = (dir.path() / "service").string();
  service::Service svc(cfg);
  svc.start();
  httplib::Client client("127.0.0.1", svc.port());
  client.set_read_timeout(300, 0);

  for (const auto& a : algo::registry()) {
    const auto m = scenarios::domain_input(a.name, 5);
    const auto r1 = dump_bicluster_set(algo::run_algorithm(a.name, m, Json::object(), 17), m);
    const auto r2 = dump_bicluster_set(algo::run_algorithm(a.name, m, Json::object(), 17), m);

    const auto path = dir.file(a.name + ".tsv");
    save_matrix(m, path);
    std::ostringstream out, err;
    const int code = cli::run({"run", "--algo", a.name, "--seed", "17", "-i", path}, out, err);

    std::string served;
    const auto up = client.Post("/api/datasets?name=" + a.name, matrix_to_string(m), "text/tab-separated-values");
    if (up && up->status == 200) {
      const auto ds = Json::parse(up->body)["id"].get<std::string>();
      const auto sub = client.Post(
          "/api/runs", Json{{"dataset_id", ds}, {"algorithm", a.name}, {"seed", 17}}.dump(), "application/json");
      if (sub && sub->status == 202) {
        const auto id = Json::parse(sub->body)["id"].get<std::string>();
        const Json st = svc.wait_for(id, std::chrono::minutes(5));
        if (st["status"] == "done") served = client.Get("/api/runs/" + id + "/biclusters")->body;
      }
    }
    o.check(r1 == r2 && code == 0 && out.str() == r1 && served == r1,
            a.name + ": repeat " + (r1 == r2 ? "identical" : "DIFFERS") + ", cli " +
                (code == 0 && out.str() == r1 ? "identical" : "DIFFERS") + ", service " +
                (served == r1 ? "identical" : "DIFFERS"));
  }
  svc.stop();
  return o;
}

std::string yeast_path() {
  if (const char* env = std::getenv("BICTK_YEAST")) return env;
  const auto local = std::filesystem::path(BICTK_SOURCE_DIR) / "data" / "yeast.tsv";
  return std::filesystem::exists(local) ? local.string() : "";
}

Outcome yeast_scoped() {
  Outcome o;
  const auto path = yeast_path();
  if (path.empty()) {
    o.verdict = Verdict::skip;
    o.notes.push_back("skip    no Yeast matrix (set BICTK_YEAST or add data/yeast.tsv)");
    return o;
  }
  const auto m = load_matrix(path);
  o.check(m.rows() == 2884 && m.cols() == 17,
          "shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " (want 2884x17)");
  const auto r = algo::run_cc(m, algo::CcParams::from_json({{"delta", 300.0}, {"n", 100}}), 42);
  std::vector<bool> covered(m.rows(), false);
  for (const auto& b : r.biclusters)
    for (auto i : b.rows) covered[i] = true;
  const double coverage = 100.0 * static_cast<double>(std::count(covered.begin(), covered.end(), true)) /
                          static_cast<double>(m.rows());
  o.check(r.size() == 100, std::to_string(r.size()) + " biclusters (want 100)");
  o.check(coverage >= 92 && coverage <= 100, scenarios::fmt("gene coverage %.1f%% (want 92-100%%)", coverage));
  return o;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"msr-oracle", "MSR against additive matrices and a direct evaluation", 5, msr_oracle},
      {"index-examples", "validation index examples within 1e-12", 0, index_examples},
      {"bimax-oracle", "BiMax equals brute-force maximal enumeration", 60, bimax_oracle},
      {"cc-contract-recovery", "CC delta contract and planted recovery", 30, cc_contract_recovery},
      {"kspectral-checkerboard", "kSpectral checkerboard partitions", 30, kspectral_checkerboard},
      {"plaid-self-consistency", "Plaid recovers generated layers", 60, plaid_self_consistency},
      {"planted-recovery", "LAS/ISA/xMotif/FLOC/OPSM/ITL/MSVD planted recovery", 300, planted_recovery},
      {"bistochastization", "bistochastization converges on 100/100 seeds", 0, bistochastization},
      {"determinism", "equal seeds give identical bytes across runs, CLI and service", 0, determinism},
      {"yeast-scoped", "CC on the Yeast matrix: 100 biclusters, 92-100% gene coverage", 0, yeast_scoped},
  };
  return all;
}

Verdict run_one(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.verdict != Verdict::skip && c.time_limit_s > 0)
    o.check(secs < c.time_limit_s, scenarios::fmt("runtime %.1f s (limit %.0f s)", secs, c.time_limit_s));
  const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
  std::cout << tag << "  " << c.name << "  " << c.summary << scenarios::fmt("  [%.1f s]", secs) << "\n";
  for (const auto& n : o.notes) std::cout << "        " << n << "\n";
  std::cout.flush();
  return o.verdict;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() == 1 && args[0] == "--list") {
    for (const auto& c : criteria()) std::cout << c.name << "\n";
    return 0;
  }
  if (args.size() == 2 && args[0] == "--only") {
    for (const auto& c : criteria()) {
      if (c.name != args[1]) continue;
      const Verdict v = run_one(c);
      return v == Verdict::pass ? 0 : v == Verdict::skip ? 77 : 1;
    }
    std::cerr << "unknown criterion '" << args[1] << "' (see --list)\n";
    return 2;
  }
  if (!args.empty()) {
    std::cerr << "usage: bictk_acceptance [--list | --only NAME]\n";
    return 2;
  }
  int failed = 0, skipped = 0;
  for (const auto& c : criteria()) {
    const Verdict v = run_one(c);
    failed += v == Verdict::fail;
    skipped += v == Verdict::skip;
  }
  std::cout << "\n" << criteria().size() - failed - skipped << " passed, " << failed << " failed, " << skipped
            << " skipped\n";
  return failed ? 1 : 0;
}
