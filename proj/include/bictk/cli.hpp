#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "algorithms/registry.hpp"
#include "io.hpp"
#include "preprocess.hpp"
#include "service.hpp"
#include "synth.hpp"
#include "validation.hpp"
#include "viz.hpp"

namespace bictk::cli {

namespace exit_code {
constexpr int ok = 0;
constexpr int failure = 1;  // validation, domain, parameter and I/O errors
constexpr int usage = 2;
}  // namespace exit_code

// Raised for command-line misuse that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// "key=value" -> (key, JSON value). Values that parse as JSON numbers or
// booleans keep that type; everything else is a string.
inline std::pair<std::string, Json> parse_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), raw = kv.substr(eq + 1);
  Json value = raw;
  if (!raw.empty()) {
    try {
      Json parsed = Json::parse(raw);
      if (parsed.is_number() || parsed.is_boolean()) value = std::move(parsed);
    } catch (const nlohmann::json::exception&) {
    }
  }
  return {key, value};
}

// "op key=value key=value" -> {"op": ..., key: value, ...}
inline Json parse_step(const std::string& text) {
  std::istringstream in(text);
  std::string op, token;
  in >> op;
  if (op.empty()) throw UsageError("empty --step");
  Json step = {{"op", op}};
  while (in >> token) {
    auto [k, v] = parse_assignment(token);
    step[k] = std::move(v);
  }
  return step;
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << text;
}

inline bictk::LoadOptions load_options(const std::string& path, const std::string& delimiter) {
  bictk::LoadOptions opt;
  if (delimiter == "tab" || delimiter == "\\t") {
    opt.delimiter = '\t';
  } else if (delimiter == "comma" || delimiter == ",") {
    opt.delimiter = ',';
  } else if (delimiter.size() == 1) {
    opt.delimiter = delimiter[0];
  } else if (delimiter.empty()) {
    const auto ext = std::filesystem::path(path).extension().string();
    opt.delimiter = bictk::detail::iequals(ext, ".csv") ? ',' : '\t';
  } else {
    throw UsageError("unsupported delimiter '" + delimiter + "'");
  }
  return opt;
}

inline Json read_json_arg(const std::string& arg) {
  const bool inline_json = !arg.empty() && (arg.front() == '{' || arg.front() == '[');
  const std::string text = inline_json ? arg : bictk::read_file(arg);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON in '") + (inline_json ? "<inline>" : arg) +
                     "': " + e.what());
  }
}

}  // namespace detail

struct Options {
  std::uint64_t seed = 42;
  std::string input, output, delimiter;
  int verbosity = 0;

  // preprocess
  std::string config;
  std::vector<std::string> steps;
  // run
  std::string algo;
  std::vector<std::string> params;
  bool schema = false;
  // validate / viz
  std::string biclusters, reference, scope = "all";
  std::vector<std::string> indices;
  double omega = 1.0;
  std::string variance_mode = "normalized";
  std::string kind = "heatmap", colormap = "bwr";
  long long bicluster = -1;
  int width = 800, height = 600;
  bool highlight = false;
  // synth
  std::string spec, truth;
  // serve
  int port = 8080;
  int workers = 2;
  std::string data_dir, ui_dir;
};

inline int cmd_preprocess(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.input.empty()) throw UsageError("preprocess needs --input");
  Json steps = Json::array();
  if (!o.config.empty()) {
    const Json c = detail::read_json_arg(o.config);
    const Json& list = c.is_array() ? c : c.value("steps", Json::array());
    for (const auto& s : list) steps.push_back(s);
  }
  for (const auto& s : o.steps) steps.push_back(detail::parse_step(s));
  if (steps.empty()) throw UsageError("preprocess needs --config or at least one --step");
  const auto m = bictk::load_matrix(o.input, detail::load_options(o.input, o.delimiter));
  const auto result = preprocess::apply_pipeline(m, steps);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  detail::write_output(o.output, bictk::matrix_to_string(result.matrix), out);
  if (o.verbosity > 0)
    err << "preprocess: " << result.matrix.rows() << " x " << result.matrix.cols() << "\n";
  return exit_code::ok;
}

inline Json collect_params(const std::vector<std::string>& kvs, const std::string& algo) {
  Json p = Json::object();
  for (const auto& kv : kvs) {
    auto [k, v] = detail::parse_assignment(kv);
    if (algo == "all") {
      const auto dot = k.find('.');
      if (dot == std::string::npos)
        throw UsageError("with --algo all, parameters are written algo.key=value (got '" + kv + "')");
      p[k.substr(0, dot)][k.substr(dot + 1)] = std::move(v);
    } else {
      p[k] = std::move(v);
    }
  }
  return p;
}

inline int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.schema) {
    out << algo::registry_json().dump(2) << "\n";
    return exit_code::ok;
  }
  if (o.algo.empty()) throw UsageError("run needs --algo (valid: " + algo::joined_algorithm_names() + ", all)");
  if (o.algo != "all" && !algo::find_algorithm(o.algo)) {
    throw UsageError("unknown algorithm '" + o.algo + "' (valid: " + algo::joined_algorithm_names() +
                     ", all)");
  }
  if (o.input.empty()) throw UsageError("run needs --input");
  const Json params = collect_params(o.params, o.algo);
  const auto m = bictk::load_matrix(o.input, detail::load_options(o.input, o.delimiter));

  if (o.algo != "all") {
    const auto set = algo::run_algorithm(o.algo, m, params, o.seed);
    detail::write_output(o.output, bictk::dump_bicluster_set(set, m), out);
    if (o.verbosity > 0)
      err << o.algo << ": " << set.size() << " biclusters (seed " << o.seed << ")\n";
    return exit_code::ok;
  }

  for (auto it = params.begin(); it != params.end(); ++it)
    if (!algo::find_algorithm(it.key()))
      throw UsageError("unknown algorithm '" + it.key() + "' in --param");
  const auto& reg = algo::registry();
  std::vector<std::future<BiclusterSet>> jobs;
  for (std::size_t k = 0; k < reg.size(); ++k) {
    const Json p = params.value(reg[k].name, Json::object());
    const std::uint64_t s = derive_seed(o.seed, k);
    jobs.push_back(std::async(std::launch::async,
                              [&m, &info = reg[k], p, s] { return info.run(m, p, s); }));
  }
  Json combined = Json::object();
  int status = exit_code::ok;
  if (!o.output.empty()) std::filesystem::create_directories(o.output);
  for (std::size_t k = 0; k < reg.size(); ++k) {
    try {
      const auto set = jobs[k].get();
      const std::string doc = bictk::dump_bicluster_set(set, m);
      if (o.output.empty()) {
        combined[reg[k].name] = Json::parse(doc);
      } else {
        detail::write_output((std::filesystem::path(o.output) / (reg[k].name + ".json")).string(),
                             doc, out);
      }
      if (o.verbosity > 0) err << reg[k].name << ": " << set.size() << " biclusters\n";
    } catch (const DomainError& e) {
      err << reg[k].name << ": skipped (" << e.what() << ")\n";
    } catch (const Error& e) {
      err << reg[k].name << ": error: " << e.what() << "\n";
      status = exit_code::failure;
    }
  }
  if (o.output.empty()) out << combined.dump(2) << "\n";
  return status;
}

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream&) {
  if (o.input.empty() || o.biclusters.empty())
    throw UsageError("validate needs --input and --biclusters");
  const auto m = bictk::load_matrix(o.input, detail::load_options(o.input, o.delimiter));
  const auto set = bictk::load_bicluster_set(o.biclusters, m);
  std::optional<BiclusterSet> ref;
  if (!o.reference.empty()) ref = bictk::load_bicluster_set(o.reference, m);

  ValidationOptions opt;
  opt.omega = o.omega;
  if (o.variance_mode == "raw_sum") {
    opt.variance_mode = VarianceMode::raw_sum;
  } else if (o.variance_mode != "normalized") {
    throw UsageError("--variance-mode must be normalized or raw_sum");
  }
  if (!o.indices.empty()) {
    opt.indices.clear();
    for (const auto& arg : o.indices) {
      std::stringstream ss(arg);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (name == "all") {
          opt.indices = all_indices();
          break;
        }
        opt.indices.push_back(index_from_string(name));
      }
    }
  }
  if (o.scope != "all" && o.scope != "individual" && o.scope != "overall")
    throw UsageError("--scope must be all, individual or overall");
  const auto report = validate(m, set, opt, ref ? &*ref : nullptr);
  Json j = to_json(report, o.scope);
  j["seed"] = set.seed;
  detail::write_output(o.output, j.dump(2) + "\n", out);
  return exit_code::ok;
}

inline int cmd_viz(const Options& o, std::ostream& out, std::ostream&) {
  if (o.input.empty()) throw UsageError("viz needs --input");
  const auto m = bictk::load_matrix(o.input, detail::load_options(o.input, o.delimiter));
  BiclusterSet set;
  if (!o.biclusters.empty()) set = bictk::load_bicluster_set(o.biclusters, m);
  if (o.kind == "matrix") {
    if (o.bicluster < 0 || static_cast<std::size_t>(o.bicluster) >= set.size())
      throw ValidationError("--kind matrix needs --biclusters and a valid --bicluster index");
    detail::write_output(o.output,
                         bictk::matrix_to_string(bictk::bicluster_matrix(m, set.biclusters[o.bicluster])),
                         out);
    return exit_code::ok;
  }
  viz::RenderSpec spec;
  spec.kind = viz::plot_kind_from_string(o.kind);
  if (o.bicluster >= 0) spec.bicluster = static_cast<std::size_t>(o.bicluster);
  spec.colormap = o.colormap;
  spec.width = o.width;
  spec.height = o.height;
  spec.highlight = o.highlight;
  detail::write_output(o.output, viz::render(m, set, spec), out);
  return exit_code::ok;
}

inline int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.spec.empty()) throw UsageError("synth needs --spec (file or inline JSON)");
  const auto spec = synth::spec_from_json(detail::read_json_arg(o.spec));
  const auto g = synth::generate(spec, o.seed);
  detail::write_output(o.output, bictk::matrix_to_string(g.matrix), out);
  if (!o.truth.empty()) {
    detail::write_output(o.truth, bictk::dump_bicluster_set(g.truth, g.matrix), out);
  }
  if (o.verbosity > 0)
    err << "synth: " << g.matrix.rows() << " x " << g.matrix.cols() << ", "
        << g.truth.size() << " planted (seed " << o.seed << ")\n";
  return exit_code::ok;
}

inline int cmd_serve(const Options& o, std::ostream&, std::ostream& err) {
  service::ServiceConfig cfg;
  cfg.port = o.port;
  cfg.worker_count = o.workers;
  cfg.data_dir = o.data_dir.empty() ? service::default_data_dir() : o.data_dir;
  cfg.ui_dir = o.ui_dir;
  return service::serve(cfg, err);
}

// Runs the command line in-process. Results go to `out`, diagnostics to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"bictk: biclustering toolkit", "bictk"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "random seed (default 42)");
  app.add_option("-i,--input", o.input, "input matrix (tab- or comma-delimited)");
  app.add_option("-o,--output", o.output, "output file (default: standard output)");
  app.add_option("--delimiter", o.delimiter, "tab, comma or a single character");
  app.add_flag("-v,--verbose", o.verbosity, "more diagnostics on standard error");

  auto* pre = app.add_subcommand("preprocess", "filter, binarize, discretize or normalize");
  pre->add_option("--config", o.config, "pipeline JSON file or inline JSON");
  pre->add_option("--step", o.steps, "step as 'op key=value ...' (repeatable)");

  auto* run = app.add_subcommand("run", "run a biclustering algorithm");
  run->add_option("--algo", o.algo, "algorithm name or 'all'");
  run->add_option("--param", o.params, "parameter key=value (repeatable)");
  run->add_flag("--schema", o.schema, "print the parameter schemas of every algorithm");

  auto* val = app.add_subcommand("validate", "compute validation indices");
  val->add_option("--biclusters", o.biclusters, "bicluster set JSON")->required();
  val->add_option("--reference", o.reference, "reference bicluster set for jaccard/hausdorff");
  val->add_option("--index", o.indices, "indices (comma separated or 'all')");
  val->add_option("--scope", o.scope, "all, individual or overall");
  val->add_option("--omega", o.omega, "SB score regularizer");
  val->add_option("--variance-mode", o.variance_mode, "normalized or raw_sum");

  auto* viz = app.add_subcommand("viz", "render a heat map, gene plot or cluster plot");
  viz->add_option("--biclusters", o.biclusters, "bicluster set JSON");
  viz->add_option("--kind", o.kind, "heatmap, gene_plot, cluster_plot or matrix");
  viz->add_option("--bicluster", o.bicluster, "bicluster index");
  viz->add_option("--colormap", o.colormap, "bwr, gray or viridis");
  viz->add_option("--width", o.width, "width in pixels");
  viz->add_option("--height", o.height, "height in pixels");
  viz->add_flag("--highlight", o.highlight, "move the bicluster to the top-left and outline it");

  auto* syn = app.add_subcommand("synth", "generate a matrix with planted biclusters");
  syn->add_option("--spec", o.spec, "planted spec JSON file or inline JSON");
  syn->add_option("--truth", o.truth, "write the planted biclusters here");

  auto* srv = app.add_subcommand("serve", "start the HTTP service");
  srv->add_option("--port", o.port, "port (0 picks a free one)");
  srv->add_option("--workers", o.workers, "job worker threads")->check(CLI::PositiveNumber);
  srv->add_option("--data-dir", o.data_dir, "storage directory (default $BICTK_DATA_DIR)");
  srv->add_option("--ui-dir", o.ui_dir, "static UI bundle served at /");

  std::vector<const char*> argv{"bictk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  }

  try {
    if (*pre) return cmd_preprocess(o, out, err);
    if (*run) return cmd_run(o, out, err);
    if (*val) return cmd_validate(o, out, err);
    if (*viz) return cmd_viz(o, out, err);
    if (*syn) return cmd_synth(o, out, err);
    if (*srv) return cmd_serve(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code::failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
  return exit_code::usage;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bictk::cli
