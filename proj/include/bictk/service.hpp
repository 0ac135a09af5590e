#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "algorithms/registry.hpp"
#include "io.hpp"
#include "preprocess.hpp"
#include "validation.hpp"
#include "viz.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a macro named _res.
#include <httplib.h>

namespace bictk::service {

namespace fs = std::filesystem;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int worker_count = 2;
  std::string data_dir;
  std::string ui_dir;  // static bundle mounted at /, optional
};

inline std::string default_data_dir() {
  const char* env = std::getenv("BICTK_DATA_DIR");
  return env && *env ? env : "bictk-data";
}

inline int http_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::not_found: return 404;
    case ErrorKind::conflict: return 409;
    case ErrorKind::parameter: return 422;
    case ErrorKind::convergence: return 500;
    default: return 400;
  }
}

struct Dataset {
  std::string id;
  std::string name;
  std::string created_at;
  std::string parent;  // dataset this one was preprocessed from
  Json steps = Json::array();
  std::shared_ptr<const ExpressionMatrix> matrix;
};

struct Job {
  std::string id;
  RunDescriptor run;
  double progress = 0.0;
  std::string error;
  std::shared_ptr<const BiclusterSet> result;
  std::shared_ptr<const std::string> result_text;  // same bytes the CLI writes
};

namespace detail {

inline void write_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << text;
  }
  fs::rename(tmp, path);
}

// Numeric part of "d12" / "r7"; 0 when the id has another shape.
inline std::size_t id_number(const std::string& id) {
  if (id.size() < 2) return 0;
  std::size_t v = 0;
  for (std::size_t k = 1; k < id.size(); ++k) {
    if (id[k] < '0' || id[k] > '9') return 0;
    v = v * 10 + static_cast<std::size_t>(id[k] - '0');
  }
  return v;
}

inline char guess_delimiter(const std::string& filename, const std::string& text) {
  const auto ext = fs::path(filename).extension().string();
  if (bictk::detail::iequals(ext, ".csv")) return ',';
  if (bictk::detail::iequals(ext, ".tsv") || bictk::detail::iequals(ext, ".txt")) return '\t';
  const auto line = text.substr(0, text.find('\n'));
  return line.find('\t') == std::string::npos && line.find(',') != std::string::npos ? ',' : '\t';
}

inline char delimiter_from_string(const std::string& d) {
  if (d == "tab" || d == "\\t" || d == "\t") return '\t';
  if (d == "comma" || d == ",") return ',';
  if (d.size() == 1) return d[0];
  throw ParameterError("unsupported delimiter '" + d + "'");
}

inline Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw ParseError("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON body: ") + e.what());
  }
}

template <typename T>
T body_field(const Json& body, const char* key, T fallback) {
  if (!body.contains(key) || body[key].is_null()) return fallback;
  try {
    return body[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

inline long long query_int(const httplib::Request& req, const char* key, long long fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError(std::string("query parameter '") + key + "' must be an integer (got '" + v +
                     "')");
  }
}

inline bool query_flag(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return false;
  const std::string v = req.get_param_value(key);
  return v.empty() || v == "1" || v == "true" || v == "yes";
}

}  // namespace detail

// Dataset and run registry with a bounded worker pool. Every public method is
// safe to call from any thread; HTTP handlers are thin wrappers around them.
class Service {
 public:
  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.data_dir.empty()) cfg_.data_dir = default_data_dir();
    if (cfg_.worker_count < 1) throw ParameterError("worker_count must be >= 1");
    fs::create_directories(datasets_dir());
    fs::create_directories(runs_dir());
    load();
  }
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service() { stop(); }

  // Binds the port and starts the listener and the workers.
  void start() {
    if (listener_.joinable()) return;
    server_ = std::make_unique<httplib::Server>();
    routes(*server_);
    if (cfg_.port == 0) {
      port_ = server_->bind_to_any_port(cfg_.host);
    } else {
      port_ = server_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
    }
    if (port_ <= 0) {
      throw ValidationError("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    }
    {
      std::lock_guard lock(mu_);
      stopping_ = false;
    }
    for (int k = 0; k < cfg_.worker_count; ++k) workers_.emplace_back([this] { work(); });
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }

  // Stops accepting requests, lets running jobs finish, joins every thread.
  void stop() {
    if (server_) server_->stop();
    if (listener_.joinable()) listener_.join();
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
    workers_.clear();
  }

  int port() const { return port_; }
  const ServiceConfig& config() const { return cfg_; }

  // ---- datasets ----------------------------------------------------------

  Json add_dataset(const std::string& name, const std::string& text,
                   const std::string& delimiter = "") {
    bictk::LoadOptions opt;
    opt.delimiter =
        delimiter.empty() ? detail::guess_delimiter(name, text) : detail::delimiter_from_string(delimiter);
    auto m = std::make_shared<const ExpressionMatrix>(bictk::parse_matrix(text, opt));
    Dataset d;
    d.name = name.empty() ? "upload" : name;
    d.created_at = utc_timestamp();
    d.matrix = std::move(m);
    return dataset_brief(insert_dataset(std::move(d)));
  }

  Json list_datasets() const {
    std::lock_guard lock(mu_);
    Json out = Json::array();
    for (const auto& id : dataset_order_) out.push_back(dataset_brief(datasets_.at(id)));
    return out;
  }

  Json dataset_summary(const std::string& id) const {
    const Dataset d = get_dataset(id);
    const auto& m = *d.matrix;
    Json j = dataset_brief(d);
    double lo = 0, hi = 0, sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = 0; k < m.cols(); ++k) {
        if (m.missing()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) continue;
        const double v = m(i, k);
        lo = count ? std::min(lo, v) : v;
        hi = count ? std::max(hi, v) : v;
        sum += v;
        ++count;
      }
    j["min"] = count ? Json(lo) : Json();
    j["max"] = count ? Json(hi) : Json();
    j["mean"] = count ? Json(sum / static_cast<double>(count)) : Json();
    j["col_ids"] = m.col_ids();
    constexpr std::size_t kPreview = 50;
    j["row_ids"] = std::vector<std::string>(
        m.row_ids().begin(), m.row_ids().begin() + std::min(kPreview, m.rows()));
    j["row_ids_truncated"] = m.rows() > kPreview;
    j["steps"] = d.steps;
    j["parent"] = d.parent.empty() ? Json() : Json(d.parent);
    return j;
  }

  std::string dataset_matrix(const std::string& id) const {
    return bictk::matrix_to_string(*get_dataset(id).matrix);
  }

  // Applies a preprocessing pipeline and stores the result as a new dataset.
  Json preprocess(const std::string& id, const Json& steps) {
    const Dataset src = get_dataset(id);
    {
      std::lock_guard lock(mu_);
      for (const auto& [jid, job] : jobs_) {
        if (job.run.dataset == id &&
            (job.run.status == RunStatus::queued || job.run.status == RunStatus::running)) {
          throw ConflictError("dataset '" + id + "' has active run '" + jid + "'");
        }
      }
    }
    auto outcome = preprocess::apply_pipeline(*src.matrix, steps);
    Dataset d;
    d.name = src.name + " (preprocessed)";
    d.created_at = utc_timestamp();
    d.parent = id;
    d.steps = steps.is_array() ? steps : steps.value("steps", Json::array());
    d.matrix = std::make_shared<const ExpressionMatrix>(std::move(outcome.matrix));
    Json j = dataset_brief(insert_dataset(std::move(d)));
    j["warnings"] = outcome.warnings;
    return j;
  }

  // ---- runs --------------------------------------------------------------

  Json submit_run(const std::string& dataset_id, const std::string& algorithm, const Json& params,
                  std::uint64_t seed) {
    get_dataset(dataset_id);
    const Json resolved = algo::resolved_params(algorithm, params);
    Job job;
    job.run.dataset = dataset_id;
    job.run.algorithm = algorithm;
    job.run.params = resolved;
    job.run.seed = seed;
    std::lock_guard lock(mu_);
    job.id = "r" + std::to_string(++next_run_);
    jobs_[job.id] = job;
    run_order_.push_back(job.id);
    persist_job(job);
    queue_.push_back(job.id);
    cv_.notify_one();
    return {{"id", job.id}, {"status", to_string(job.run.status)}};
  }

  Json list_runs() const {
    std::lock_guard lock(mu_);
    Json out = Json::array();
    for (const auto& id : run_order_) out.push_back(job_json(jobs_.at(id)));
    return out;
  }

  Json run_status(const std::string& id) const {
    std::lock_guard lock(mu_);
    return job_json(find_job(id));
  }

  std::string run_biclusters(const std::string& id) const { return *finished(id).result_text; }

  std::string run_viz(const std::string& id, viz::RenderSpec spec) const {
    const Job job = finished(id);
    const Dataset d = get_dataset(job.run.dataset);
    return viz::render(*d.matrix, *job.result, spec);
  }

  // body: {run_id, indices?, reference_run_id?, omega?, scope?, variance_mode?}
  Json validate_run(const Json& body) const {
    const auto run_id = detail::body_field<std::string>(body, "run_id", "");
    if (run_id.empty()) throw ParseError("field 'run_id' is required");
    const Job job = finished(run_id);
    const Dataset d = get_dataset(job.run.dataset);
    ValidationOptions opt;
    opt.omega = detail::body_field<double>(body, "omega", 1.0);
    const auto mode = detail::body_field<std::string>(body, "variance_mode", "normalized");
    if (mode == "raw_sum") {
      opt.variance_mode = VarianceMode::raw_sum;
    } else if (mode != "normalized") {
      throw ParameterError("variance_mode must be normalized or raw_sum (got '" + mode + "')");
    }
    if (body.contains("indices") && !body["indices"].is_null()) {
      const Json& idx = body["indices"];
      if (idx.is_string() && idx.get<std::string>() == "all") {
        opt.indices = all_indices();
      } else if (idx.is_array()) {
        opt.indices.clear();
        for (const auto& x : idx) {
          if (!x.is_string()) throw ParseError("indices must be strings");
          opt.indices.push_back(index_from_string(x.get<std::string>()));
        }
      } else {
        throw ParseError("indices must be an array of names or \"all\"");
      }
    }
    std::optional<Job> ref;
    const auto ref_id = detail::body_field<std::string>(body, "reference_run_id", "");
    if (!ref_id.empty()) ref = finished(ref_id);
    const auto scope = detail::body_field<std::string>(body, "scope", "all");
    if (scope != "all" && scope != "individual" && scope != "overall")
      throw ParameterError("scope must be all, individual or overall (got '" + scope + "')");
    const auto report = validate(*d.matrix, *job.result, opt, ref ? ref->result.get() : nullptr);
    Json j = to_json(report, scope);
    j["run_id"] = run_id;
    j["seed"] = job.run.seed;
    if (ref) j["reference_run_id"] = ref_id;
    return j;
  }

  // Blocks until the run leaves queued/running or the timeout expires.
  Json wait_for(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    done_cv_.wait_for(lock, timeout, [&] {
      const auto s = find_job(id).run.status;
      return s == RunStatus::done || s == RunStatus::failed;
    });
    return job_json(find_job(id));
  }

 private:
  fs::path datasets_dir() const { return fs::path(cfg_.data_dir) / "datasets"; }
  fs::path runs_dir() const { return fs::path(cfg_.data_dir) / "runs"; }

  static Json dataset_brief(const Dataset& d) {
    return {{"id", d.id},
            {"name", d.name},
            {"shape", {d.matrix->rows(), d.matrix->cols()}},
            {"missing_count", d.matrix->missing_count()},
            {"created_at", d.created_at}};
  }

  Json job_json(const Job& job) const {
    Json j = to_json(job.run);
    j["id"] = job.id;
    j["dataset_id"] = job.run.dataset;
    j.erase("dataset");
    j["progress"] = job.progress;
    if (!job.error.empty()) j["error"] = job.error;
    if (job.result) j["count"] = job.result->size();
    return j;
  }

  Dataset insert_dataset(Dataset d) {
    std::lock_guard lock(mu_);
    d.id = "d" + std::to_string(++next_dataset_);
    bictk::save_matrix(*d.matrix, (datasets_dir() / (d.id + ".tsv")).string());
    const Json meta = {{"id", d.id},         {"name", d.name},   {"created_at", d.created_at},
                       {"parent", d.parent}, {"steps", d.steps}};
    detail::write_atomic(datasets_dir() / (d.id + ".json"), meta.dump(2) + "\n");
    datasets_[d.id] = d;
    dataset_order_.push_back(d.id);
    return d;
  }

  Dataset get_dataset(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = datasets_.find(id);
    if (it == datasets_.end()) throw NotFoundError("unknown dataset '" + id + "'");
    return it->second;
  }

  const Job& find_job(const std::string& id) const {
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw NotFoundError("unknown run '" + id + "'");
    return it->second;
  }

  // Snapshot of a finished run; ConflictError while queued or running.
  Job finished(const std::string& id) const {
    std::lock_guard lock(mu_);
    const Job& job = find_job(id);
    if (job.run.status == RunStatus::failed)
      throw std::runtime_error("run '" + id + "' failed: " + job.error);
    if (job.run.status != RunStatus::done)
      throw ConflictError("run '" + id + "' is " + to_string(job.run.status));
    return job;
  }

  // Caller holds mu_.
  void persist_job(const Job& job) const {
    Json j = to_json(job.run);
    j["id"] = job.id;
    j["error"] = job.error;
    detail::write_atomic(runs_dir() / (job.id + ".json"), j.dump(2) + "\n");
  }

  void load() {
    std::vector<fs::path> metas;
    for (const auto& e : fs::directory_iterator(datasets_dir()))
      if (e.path().extension() == ".json") metas.push_back(e.path());
    std::sort(metas.begin(), metas.end(), [](const fs::path& a, const fs::path& b) {
      return detail::id_number(a.stem().string()) < detail::id_number(b.stem().string());
    });
    for (const auto& p : metas) {
      const Json meta = Json::parse(bictk::read_file(p.string()));
      Dataset d;
      d.id = meta.at("id").get<std::string>();
      d.name = meta.value("name", d.id);
      d.created_at = meta.value("created_at", "");
      d.parent = meta.value("parent", "");
      d.steps = meta.value("steps", Json::array());
      d.matrix = std::make_shared<const ExpressionMatrix>(
          bictk::load_matrix((datasets_dir() / (d.id + ".tsv")).string()));
      next_dataset_ = std::max(next_dataset_, detail::id_number(d.id));
      dataset_order_.push_back(d.id);
      datasets_[d.id] = std::move(d);
    }

    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(runs_dir())) {
      const auto name = e.path().filename().string();
      if (e.path().extension() == ".json" && name.find(".set.") == std::string::npos)
        runs.push_back(e.path());
    }
    std::sort(runs.begin(), runs.end(), [](const fs::path& a, const fs::path& b) {
      return detail::id_number(a.stem().string()) < detail::id_number(b.stem().string());
    });
    for (const auto& p : runs) {
      const Json j = Json::parse(bictk::read_file(p.string()));
      Job job;
      job.id = j.at("id").get<std::string>();
      job.run = run_descriptor_from_json(j);
      job.error = j.value("error", "");
      next_run_ = std::max(next_run_, detail::id_number(job.id));
      if (job.run.status == RunStatus::queued || job.run.status == RunStatus::running) {
        if (job.run.status == RunStatus::queued) job.run.advance(RunStatus::running);
        job.run.advance(RunStatus::failed);
        job.error = "lost on server restart";
        persist_job(job);
      }
      if (job.run.status == RunStatus::done) {
        const auto ds = datasets_.find(job.run.dataset);
        const fs::path set_path = runs_dir() / (job.id + ".set.json");
        if (ds != datasets_.end() && fs::exists(set_path)) {
          auto text = std::make_shared<const std::string>(bictk::read_file(set_path.string()));
          job.result = std::make_shared<const BiclusterSet>(
              bictk::parse_bicluster_set(*text, *ds->second.matrix));
          job.result_text = std::move(text);
        } else {
          job.run.status = RunStatus::failed;
          job.error = "result file missing";
        }
      }
      job.progress = job.run.status == RunStatus::done ? 1.0 : 0.0;
      run_order_.push_back(job.id);
      jobs_[job.id] = std::move(job);
    }
  }

  void work() {
    for (;;) {
      std::string id;
      Job snapshot;
      std::shared_ptr<const ExpressionMatrix> matrix;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        id = queue_.front();
        queue_.pop_front();
        Job& job = jobs_.at(id);
        job.run.advance(RunStatus::running);
        persist_job(job);
        snapshot = job;
        matrix = datasets_.at(job.run.dataset).matrix;
      }
      std::shared_ptr<const BiclusterSet> result;
      std::shared_ptr<const std::string> text;
      std::string error;
      try {
        auto set = algo::run_algorithm(snapshot.run.algorithm, *matrix, snapshot.run.params,
                                       snapshot.run.seed);
        text = std::make_shared<const std::string>(bictk::dump_bicluster_set(set, *matrix));
        detail::write_atomic(runs_dir() / (id + ".set.json"), *text);
        result = std::make_shared<const BiclusterSet>(std::move(set));
      } catch (const Error& e) {
        error = std::string(to_string(e.kind())) + ": " + e.what();
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mu_);
        Job& job = jobs_.at(id);
        job.run.advance(error.empty() ? RunStatus::done : RunStatus::failed);
        job.error = error;
        job.result = result;
        job.result_text = text;
        job.progress = 1.0;
        persist_job(job);
      }
      done_cv_.notify_all();
    }
  }

  template <typename F>
  static void guarded(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      res.status = http_status(e.kind());
      res.set_content(Json{{"error", e.what()}, {"kind", to_string(e.kind())}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"error", e.what()}, {"kind", "internal"}}.dump(), "application/json");
    }
  }

  static void send_json(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(2) + "\n", "application/json");
  }

  void routes(httplib::Server& s) {
    s.Post("/api/datasets", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::string name = req.get_param_value("name"), delim = req.get_param_value("delimiter");
        std::string text;
        if (req.is_multipart_form_data()) {
          if (!req.has_file("file")) throw ParseError("multipart upload needs a 'file' field");
          const auto file = req.get_file_value("file");
          text = file.content;
          if (name.empty()) name = req.has_file("name") ? req.get_file_value("name").content : file.filename;
          if (delim.empty() && req.has_file("delimiter")) delim = req.get_file_value("delimiter").content;
        } else {
          text = req.body;
        }
        if (text.empty()) throw ParseError("empty upload");
        send_json(res, add_dataset(name, text, delim));
      });
    });
    s.Get("/api/datasets", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, list_datasets()); });
    });
    s.Get(R"(/api/datasets/([^/]+)/summary)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, dataset_summary(req.matches[1])); });
    });
    s.Get(R"(/api/datasets/([^/]+)/matrix)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { res.set_content(dataset_matrix(req.matches[1]), "text/tab-separated-values"); });
    });
    s.Post(R"(/api/datasets/([^/]+)/preprocess)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = detail::parse_body(req.body);
        if (!body.contains("steps")) throw ParseError("field 'steps' is required");
        send_json(res, preprocess(req.matches[1], body["steps"]));
      });
    });
    s.Get("/api/algorithms", [](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, algo::registry_json()); });
    });
    s.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Json body = detail::parse_body(req.body);
        const auto ds = detail::body_field<std::string>(body, "dataset_id", "");
        const auto alg = detail::body_field<std::string>(body, "algorithm", "");
        if (ds.empty() || alg.empty()) throw ParseError("fields 'dataset_id' and 'algorithm' are required");
        const Json params = body.value("params", Json::object());
        if (!params.is_object()) throw ParseError("field 'params' must be an object");
        const auto seed = detail::body_field<std::uint64_t>(body, "seed", 42);
        send_json(res, submit_run(ds, alg, params, seed), 202);
      });
    });
    s.Get("/api/runs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, list_runs()); });
    });
    s.Get(R"(/api/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, run_status(req.matches[1])); });
    });
    s.Get(R"(/api/runs/([^/]+)/biclusters)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { res.set_content(run_biclusters(req.matches[1]), "application/json"); });
    });
    s.Get(R"(/api/runs/([^/]+)/viz/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        viz::RenderSpec spec;
        spec.kind = viz::plot_kind_from_string(req.matches[2]);
        const long long k = detail::query_int(req, "bicluster", -1);
        if (k >= 0) spec.bicluster = static_cast<std::size_t>(k);
        spec.highlight = detail::query_flag(req, "highlight");
        spec.width = static_cast<int>(detail::query_int(req, "width", spec.width));
        spec.height = static_cast<int>(detail::query_int(req, "height", spec.height));
        if (req.has_param("colormap")) spec.colormap = req.get_param_value("colormap");
        res.set_content(run_viz(req.matches[1], spec), "image/svg+xml");
      });
    });
    s.Post("/api/validate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, validate_run(detail::parse_body(req.body))); });
    });
    if (!cfg_.ui_dir.empty() && fs::is_directory(cfg_.ui_dir)) s.set_mount_point("/", cfg_.ui_dir);
  }

  ServiceConfig cfg_;
  int port_ = -1;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_;
  std::vector<std::thread> workers_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  mutable std::condition_variable done_cv_;
  bool stopping_ = false;
  std::deque<std::string> queue_;
  std::map<std::string, Dataset> datasets_;
  std::vector<std::string> dataset_order_;
  std::map<std::string, Job> jobs_;
  std::vector<std::string> run_order_;
  std::size_t next_dataset_ = 0, next_run_ = 0;
};

namespace detail {
inline std::atomic<bool>& shutdown_requested() {
  static std::atomic<bool> flag{false};
  return flag;
}
extern "C" inline void on_shutdown_signal(int) { shutdown_requested() = true; }
}  // namespace detail

// Runs the service until SIGINT or SIGTERM.
inline int serve(const ServiceConfig& cfg, std::ostream& log) {
  Service svc(cfg);
  detail::shutdown_requested() = false;
  std::signal(SIGINT, detail::on_shutdown_signal);
  std::signal(SIGTERM, detail::on_shutdown_signal);
  svc.start();
  log << "bictk serving on http://" << cfg.host << ":" << svc.port() << " (data in "
      << svc.config().data_dir << ")" << std::endl;
  while (!detail::shutdown_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  log << "shutting down" << std::endl;
  svc.stop();
  return 0;
}

}  // namespace bictk::service
