#include "hlsdse/qor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "hlsdse/errors.hpp"

namespace hlsdse {

namespace fs = std::filesystem;

std::vector<QoR> QorBackend::evaluate_batch(const HlsDesign& design,
                                            std::span<const DirectiveConfig> configs) const {
  std::vector<QoR> out;
  out.reserve(configs.size());
  for (const auto& config : configs) out.push_back(evaluate(design, config));
  return out;
}

MockModelParams mock_params_from_json(const nlohmann::json& j) {
  MockModelParams p;
  if (!j.is_object()) throw ParseError("mock params: expected object");
  p.ports_per_partition = j.value("ports_per_partition", p.ports_per_partition);
  p.pipeline_depth = j.value("pipeline_depth", p.pipeline_depth);
  p.dsp_per_parallel_op = j.value("dsp_per_parallel_op", p.dsp_per_parallel_op);
  p.lut_per_parallel_op = j.value("lut_per_parallel_op", p.lut_per_parallel_op);
  p.ff_per_pipeline_stage = j.value("ff_per_pipeline_stage", p.ff_per_pipeline_stage);
  p.dsp_total = j.value("dsp_total", p.dsp_total);
  p.lut_total = j.value("lut_total", p.lut_total);
  p.ff_total = j.value("ff_total", p.ff_total);
  p.bram_total = j.value("bram_total", p.bram_total);
  p.overmap_threshold = j.value("overmap_threshold", p.overmap_threshold);
  if (p.ports_per_partition < 1 || p.pipeline_depth < 1)
    throw ValidationError("mock params: ports_per_partition and pipeline_depth must be >= 1");
  return p;
}

// ---------------------------------------------------------------------------
// Analytical mock model
// ---------------------------------------------------------------------------

namespace {

struct ModelContext {
  const HlsDesign& design;
  const DirectiveConfig& config;
  const MockModelParams& params;

  const LoopDirective* directive(const LoopInfo& loop) const {
    auto it = config.loop_directives.find(loop.name);
    return it == config.loop_directives.end() ? nullptr : &it->second;
  }

  bool pipelined(const LoopInfo& loop) const {
    const LoopDirective* d = directive(loop);
    return d && d->pipeline == 1;
  }

  std::int64_t eff_unroll(const LoopInfo& loop, bool under_pipeline) const {
    if (under_pipeline) return loop.trip_count;  // pipelined ancestor: full unroll
    const LoopDirective* d = directive(loop);
    return std::max<std::int64_t>(1, d ? d->unroll : 0);
  }

  std::int64_t effective_factor(const std::string& array) const {
    ArrayDirective d;
    if (auto it = config.array_directives.find(array); it != config.array_directives.end())
      d = it->second;
    if (d.type == kPartitionComplete) {
      const ArrayInfo* info = find_array(design, array);
      return info->dims[static_cast<std::size_t>(d.dim - 1)];
    }
    return std::max<std::int64_t>(1, d.factor);
  }

  static std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

  /// Parallel access counts per array for the computation collapsed under
  /// `loop`; `multiplier` carries parallelism accumulated at and above it.
  void collect_accesses(const LoopInfo& loop, std::int64_t multiplier, bool under_pipeline,
                        std::map<std::string, std::int64_t>& acc) const {
    std::int64_t m = multiplier * eff_unroll(loop, under_pipeline);
    std::set<std::string> arrays;
    for (const auto& [array, dim] : loop.accessed_arrays) arrays.insert(array);
    for (const auto& array : arrays) acc[array] += m;
    for (const auto& child : loop.children)
      collect_accesses(child, m, under_pipeline || pipelined(loop), acc);
  }

  std::int64_t initiation_interval(const LoopInfo& root, bool under_pipeline) const {
    std::map<std::string, std::int64_t> acc;
    collect_accesses(root, 1, under_pipeline, acc);
    std::int64_t ii = 1;
    for (const auto& [array, parallel] : acc) {
      std::int64_t bandwidth = effective_factor(array) * params.ports_per_partition;
      ii = std::max(ii, ceil_div(parallel, bandwidth));
    }
    return ii;
  }

  std::int64_t latency(const LoopInfo& loop, bool under_pipeline) const {
    std::int64_t u = eff_unroll(loop, under_pipeline);
    std::int64_t iterations = ceil_div(loop.trip_count, u);
    if (pipelined(loop) || under_pipeline) {
      // The whole subtree collapses into one pipelined computation.
      std::int64_t ii = initiation_interval(loop, under_pipeline);
      return params.pipeline_depth + ii * (iterations - 1);
    }
    if (loop.children.empty()) return iterations * params.pipeline_depth;
    std::int64_t body = 0;
    for (const auto& child : loop.children) body += latency(child, false);
    return iterations * body;
  }

  std::int64_t total_parallelism(const LoopInfo& loop, std::int64_t multiplier,
                                 bool under_pipeline) const {
    std::int64_t m = multiplier * eff_unroll(loop, under_pipeline);
    if (loop.children.empty()) return m;
    std::int64_t total = 0;
    for (const auto& child : loop.children)
      total += total_parallelism(child, m, under_pipeline || pipelined(loop));
    return total;
  }
};

}  // namespace

std::int64_t mock_latency(const HlsDesign& design, const DirectiveConfig& config,
                          const MockModelParams& params) {
  ModelContext ctx{design, config, params};
  std::int64_t total = 0;
  for (const auto& root : design.loops) total += ctx.latency(root, false);
  return total;
}

std::array<double, 4> mock_resources(const HlsDesign& design, const DirectiveConfig& config,
                                     const MockModelParams& params) {
  ModelContext ctx{design, config, params};
  std::int64_t parallelism = 0;
  for (const auto& root : design.loops) parallelism += ctx.total_parallelism(root, 1, false);

  bool any_pipeline = false;
  for (const auto& [_, d] : config.loop_directives)
    if (d.pipeline == 1) any_pipeline = true;
  double stages = any_pipeline ? params.pipeline_depth : 1.0;

  double partitions = 0.0;
  for (const auto& array : design.arrays) {
    ArrayDirective d;
    if (auto it = config.array_directives.find(array.name); it != config.array_directives.end())
      d = it->second;
    if (d.type == kPartitionComplete)
      partitions += static_cast<double>(array.dims[static_cast<std::size_t>(d.dim - 1)]);
    else
      partitions += static_cast<double>(std::max<std::int64_t>(1, d.factor));
  }

  double p = static_cast<double>(parallelism);
  return {p * params.lut_per_parallel_op / params.lut_total,
          p * stages * params.ff_per_pipeline_stage / params.ff_total,
          p * params.dsp_per_parallel_op / params.dsp_total,
          partitions / params.bram_total};
}

std::map<std::string, std::int64_t> mock_leaf_contention(const HlsDesign& design,
                                                         const DirectiveConfig& config,
                                                         int ports_per_partition) {
  MockModelParams params;
  params.ports_per_partition = ports_per_partition;
  ModelContext ctx{design, config, params};

  std::map<std::string, std::int64_t> out;
  struct Walker {
    const ModelContext& ctx;
    std::map<std::string, std::int64_t>& out;
    void walk(const LoopInfo& loop, bool under_pipeline) {
      if (loop.children.empty()) {
        std::int64_t u = ctx.eff_unroll(loop, under_pipeline);
        std::int64_t worst = 1;
        for (const auto& [array, dim] : loop.accessed_arrays) {
          std::int64_t bandwidth =
              ctx.effective_factor(array) * ctx.params.ports_per_partition;
          worst = std::max(worst, ModelContext::ceil_div(u, bandwidth));
        }
        out[loop.name] = worst;
        return;
      }
      for (const auto& child : loop.children)
        walk(child, under_pipeline || ctx.pipelined(loop));
    }
  } walker{ctx, out};
  for (const auto& root : design.loops) walker.walk(root, false);
  return out;
}

std::map<std::string, std::int64_t> mock_leaf_latency_contribution(
    const HlsDesign& design, const DirectiveConfig& config, const MockModelParams& params) {
  ModelContext ctx{design, config, params};
  std::map<std::string, std::int64_t> out;

  struct Walker {
    const ModelContext& ctx;
    std::map<std::string, std::int64_t>& out;

    const LoopInfo* deepest_leaf(const LoopInfo& loop) const {
      if (loop.children.empty()) return &loop;
      const LoopInfo* best = nullptr;
      int best_depth = -1;
      for (const auto& child : loop.children) {
        int d = subtree_depth(child);
        if (d > best_depth) {
          best_depth = d;
          best = deepest_leaf(child);
        }
      }
      return best;
    }

    void walk(const LoopInfo& loop, std::int64_t outer_iterations) {
      if (ctx.pipelined(loop) || loop.children.empty()) {
        out[deepest_leaf(loop)->name] += outer_iterations * ctx.latency(loop, false);
        return;
      }
      std::int64_t iterations =
          ModelContext::ceil_div(loop.trip_count, ctx.eff_unroll(loop, false));
      for (const auto& child : loop.children) walk(child, outer_iterations * iterations);
    }
  } walker{ctx, out};

  for (const auto& root : design.loops) walker.walk(root, 1);
  return out;
}

QoR MockBackend::evaluate(const HlsDesign& design, const DirectiveConfig& config) const {
  auto [lut, ff, dsp, bram] = mock_resources(design, config, params_);
  QoR qor;
  double worst = std::max({lut, ff, dsp, bram});
  if (worst > params_.overmap_threshold) {
    qor.valid = false;
    qor.note = "over-mapped: worst ratio " + std::to_string(worst);
    return qor;
  }
  qor.latency = mock_latency(design, config, params_);
  qor.lut = lut;
  qor.ff = ff;
  qor.dsp = dsp;
  qor.bram = bram;
  qor.util = utilization(lut, ff, dsp, bram, weights_);
  qor.valid = true;
  qor.eval_seconds = 0.0;
  return qor;
}

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

ReplayBackend ReplayBackend::from_file(const std::string& path, UtilWeights weights) {
  std::ifstream in(path);
  if (!in) throw BackendError("replay dataset not readable: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str(), weights);
}

ReplayBackend ReplayBackend::from_text(const std::string& jsonl, UtilWeights weights) {
  ReplayBackend backend;
  backend.weights_ = weights;
  std::istringstream in(jsonl);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("replay dataset line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("config_hash"))
      throw ParseError("replay dataset line " + std::to_string(lineno) + ": missing config_hash");
    QoR qor = qor_from_json(j);
    qor.util = utilization(qor.lut, qor.ff, qor.dsp, qor.bram, weights);
    backend.records_[j["config_hash"].get<std::string>()] = qor;
  }
  return backend;
}

QoR ReplayBackend::evaluate(const HlsDesign& design, const DirectiveConfig& config) const {
  std::string hash = canonical_hash(design, config);
  auto it = records_.find(hash);
  if (it == records_.end())
    throw UnknownConfigError("no recorded QoR for config " + hash);
  return it->second;
}

std::string replay_record_json(const std::string& config_hash, const QoR& qor) {
  nlohmann::json j = qor_json(qor);
  j["config_hash"] = config_hash;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Process execution
// ---------------------------------------------------------------------------

ProcessResult run_with_timeout(const std::vector<std::string>& argv, const std::string& cwd,
                               double timeout_seconds) {
  if (argv.empty()) throw BackendError("run_with_timeout: empty argv");

  fs::path stdout_path = fs::path(cwd) / "tool_stdout.log";
  fs::path stderr_path = fs::path(cwd) / "tool_stderr.log";

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) throw BackendError("fork failed");
  if (pid == 0) {
    if (chdir(cwd.c_str()) != 0) _exit(126);
    int out = open("tool_stdout.log", O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int err = open("tool_stderr.log", O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (out >= 0) dup2(out, STDOUT_FILENO);
    if (err >= 0) dup2(err, STDERR_FILENO);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }

  ProcessResult result;
  int status = 0;
  while (true) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed >= timeout_seconds) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!result.timed_out) {
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  }

  std::ifstream err(stderr_path);
  if (err) {
    std::stringstream buf;
    buf << err.rdbuf();
    std::string text = buf.str();
    if (text.size() > 2000) text = text.substr(text.size() - 2000);
    result.stderr_tail = text;
  }
  return result;
}

// ---------------------------------------------------------------------------
// External tool backend
// ---------------------------------------------------------------------------

std::optional<RawReport> parse_kv_report(const std::string& text, std::string& error) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    try {
      kv[key] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      error = "malformed value for report key '" + key + "'";
      return std::nullopt;
    }
  }
  const char* required[] = {"latency_cycles", "lut", "ff", "dsp", "bram",
                            "lut_total", "ff_total", "dsp_total", "bram_total"};
  for (const char* key : required)
    if (!kv.count(key)) {
      error = std::string("report missing key '") + key + "'";
      return std::nullopt;
    }
  RawReport r;
  r.latency_cycles = static_cast<std::int64_t>(kv["latency_cycles"]);
  r.lut = kv["lut"];
  r.ff = kv["ff"];
  r.dsp = kv["dsp"];
  r.bram = kv["bram"];
  r.lut_total = kv["lut_total"];
  r.ff_total = kv["ff_total"];
  r.dsp_total = kv["dsp_total"];
  r.bram_total = kv["bram_total"];
  return r;
}

ExternalBackend::ExternalBackend(ExternalBackendConfig config) : config_(std::move(config)) {
  if (!config_.parser) config_.parser = parse_kv_report;
  if (const char* env = std::getenv("HLS_DSE_TIMEOUT_SECS")) {
    try {
      config_.timeout_seconds = std::stod(env);
    } catch (const std::exception&) {
      throw BackendError("HLS_DSE_TIMEOUT_SECS is not a number");
    }
  }
  if (access(config_.tool_cmd.c_str(), X_OK) != 0)
    throw BackendError("tool command not executable: " + config_.tool_cmd);
}

QoR ExternalBackend::evaluate(const HlsDesign& design, const DirectiveConfig& config) const {
  static std::atomic<std::uint64_t> counter{0};
  std::string tag =
      canonical_hash(design, config) + "_" + std::to_string(counter.fetch_add(1));
  fs::path dir = fs::path(config_.workdir_root) / ("eval_" + tag);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw BackendError("cannot create working directory " + dir.string());

  {
    std::ofstream script(dir / "script.tcl");
    if (!script) throw BackendError("cannot write script.tcl in " + dir.string());
    script << emit_tcl(design, config, config_.project);
  }

  ProcessResult res =
      run_with_timeout({config_.tool_cmd, "script.tcl"}, dir.string(), config_.timeout_seconds);

  QoR qor;
  qor.eval_seconds = res.seconds;
  if (res.timed_out) {
    qor.note = "synthesis timeout after " + std::to_string(config_.timeout_seconds) + "s";
    return qor;
  }
  if (res.exit_code != 0) {
    qor.note = "tool exit code " + std::to_string(res.exit_code) +
               (res.stderr_tail.empty() ? "" : ": " + res.stderr_tail);
    return qor;
  }

  std::ifstream report(dir / config_.report_filename);
  if (!report) {
    qor.note = "missing report file " + (dir / config_.report_filename).string();
    return qor;
  }
  std::stringstream buffer;
  buffer << report.rdbuf();
  std::string error;
  auto raw = config_.parser(buffer.str(), error);
  if (!raw) {
    qor.note = error;
    return qor;
  }
  if (raw->lut_total <= 0 || raw->ff_total <= 0 || raw->dsp_total <= 0 || raw->bram_total <= 0) {
    qor.note = "report device totals must be positive";
    return qor;
  }
  qor.latency = raw->latency_cycles;
  qor.lut = raw->lut / raw->lut_total;
  qor.ff = raw->ff / raw->ff_total;
  qor.dsp = raw->dsp / raw->dsp_total;
  qor.bram = raw->bram / raw->bram_total;
  qor.util = utilization(qor.lut, qor.ff, qor.dsp, qor.bram, config_.weights);
  qor.valid = true;
  return qor;
}

std::vector<QoR> ExternalBackend::evaluate_batch(const HlsDesign& design,
                                                 std::span<const DirectiveConfig> configs) const {
  std::vector<QoR> out(configs.size());
  int workers = std::max(1, config_.workers);
  if (workers == 1 || configs.size() <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = evaluate(design, configs[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= configs.size()) return;
          out[i] = evaluate(design, configs[i]);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

nlohmann::json qor_json(const QoR& qor) {
  nlohmann::json j = {{"latency", qor.latency}, {"lut", qor.lut},   {"ff", qor.ff},
                      {"dsp", qor.dsp},         {"bram", qor.bram}, {"util", qor.util},
                      {"valid", qor.valid},     {"eval_seconds", qor.eval_seconds}};
  if (!qor.note.empty()) j["note"] = qor.note;
  return j;
}

QoR qor_from_json(const nlohmann::json& j) {
  QoR qor;
  qor.latency = j.value("latency", std::int64_t{0});
  qor.lut = j.value("lut", 0.0);
  qor.ff = j.value("ff", 0.0);
  qor.dsp = j.value("dsp", 0.0);
  qor.bram = j.value("bram", 0.0);
  qor.util = j.value("util", 0.0);
  qor.valid = j.value("valid", false);
  qor.eval_seconds = j.value("eval_seconds", 0.0);
  qor.note = j.value("note", std::string{});
  return qor;
}

}  // namespace hlsdse
