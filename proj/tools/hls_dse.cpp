#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hlsdse/advisor.hpp"
#include "hlsdse/design.hpp"
#include "hlsdse/errors.hpp"
#include "hlsdse/pareto.hpp"
#include "hlsdse/qor.hpp"
#include "hlsdse/sampling.hpp"
#include "hlsdse/search.hpp"
#include "hlsdse/space.hpp"
#include "hlsdse/tcl.hpp"

#ifndef HLSDSE_VERSION
#define HLSDSE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace hlsdse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGeneric = 1;
constexpr int kExitConfig = 2;   // bad flags, unreadable/malformed inputs
constexpr int kExitBackend = 3;  // evaluation backend transport failure
constexpr int kExitAdvisor = 4;  // advisor role failure

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct BackendOptions {
  std::string kind = "mock";
  std::string replay_data;
  std::string tool_cmd;
  std::string workdir = ".";
  std::string mock_params_path;
  double timeout_seconds = 1200.0;
  int workers = 1;
};

std::unique_ptr<QorBackend> make_backend(const BackendOptions& opts,
                                         const ProjectSettings& project) {
  if (opts.kind == "mock") {
    MockModelParams params;
    if (!opts.mock_params_path.empty())
      params = mock_params_from_json(nlohmann::json::parse(read_file(opts.mock_params_path)));
    return std::make_unique<MockBackend>(params);
  }
  if (opts.kind == "replay") {
    if (opts.replay_data.empty()) throw ParseError("replay backend requires --replay-data");
    return std::make_unique<ReplayBackend>(ReplayBackend::from_file(opts.replay_data));
  }
  if (opts.kind == "external") {
    if (opts.tool_cmd.empty()) throw ParseError("external backend requires --tool-cmd");
    ExternalBackendConfig config;
    config.tool_cmd = opts.tool_cmd;
    config.workdir_root = opts.workdir;
    config.project = project;
    config.timeout_seconds = opts.timeout_seconds;
    config.workers = opts.workers;
    return std::make_unique<ExternalBackend>(config);
  }
  throw ParseError("unknown backend '" + opts.kind + "'");
}

struct AdvisorOptions {
  std::string kind = "rule";
  std::string endpoint;
  std::string model;
  std::string prompt_dir;
  std::string transcript;
  double temperature = 0.2;
  int max_retries = 3;
  double timeout_seconds = 30.0;
};

std::unique_ptr<Advisor> make_advisor(const AdvisorOptions& opts) {
  if (opts.kind == "rule") return std::make_unique<RuleAdvisor>();
  if (opts.kind == "http") {
    HttpAdvisorConfig config;
    config.endpoint = opts.endpoint;
    config.model = opts.model;
    config.prompt_dir = opts.prompt_dir;
    config.transcript_path = opts.transcript;
    config.temperature = opts.temperature;
    config.max_retries = opts.max_retries;
    config.timeout_seconds = opts.timeout_seconds;
    return std::make_unique<HttpAdvisor>(http_config_from_env(config));
  }
  throw ParseError("unknown advisor '" + opts.kind + "'");
}

struct SpaceOptions {
  bool no_prune = false;
  std::string rules_path;
};

DesignSpace make_space(const HlsDesign& design, const SpaceOptions& opts) {
  DesignSpace space = build_space(design);
  if (opts.no_prune) return space;
  PruneRuleSet rules;
  if (!opts.rules_path.empty())
    rules = rules_from_json(nlohmann::json::parse(read_file(opts.rules_path)));
  return prune(space, design, rules);
}

std::vector<Objectives> reference_objectives(const std::string& path) {
  std::vector<Objectives> reference;
  for (const auto& p : front_from_csv(read_file(path)))
    reference.push_back({p.latency, p.util});
  return reference;
}

int run_explore(const std::string& design_path, const std::string& config_path,
                BackendOptions backend_opts, AdvisorOptions advisor_opts, SpaceOptions space_opts,
                SearchParams params, BaselineParams baseline, bool baseline_mode,
                std::string sampler_name, std::string out_dir, std::string reference_path,
                double target_adrs, bool have_target,
                const std::function<bool(const std::string&)>& flag_given) {
  // config-file values apply wherever the matching flag was not given
  nlohmann::json cfg = nlohmann::json::object();
  if (!config_path.empty()) cfg = nlohmann::json::parse(read_file(config_path));
  auto fill = [&](const char* flag, const char* key, auto& slot) {
    using T = std::decay_t<decltype(slot)>;
    if (!flag_given(flag) && cfg.contains(key)) slot = cfg[key].get<T>();
  };
  std::string design_file = design_path;
  if (design_file.empty() && cfg.contains("design"))
    design_file = cfg["design"].get<std::string>();
  if (design_file.empty()) throw ParseError("explore: no design file given");
  if (reference_path.empty() && cfg.contains("reference"))
    reference_path = cfg["reference"].get<std::string>();
  fill("--seed", "seed", params.seed);
  fill("--n0", "n0", params.n0);
  fill("--i-max", "i_max", params.i_max);
  fill("--pop-size", "pop_size", params.pop_size);
  fill("--rank2-quota", "rank2_quota", params.rank2_quota);
  fill("--generations", "generations", baseline.generations);
  fill("--crossover-prob", "crossover_prob", baseline.crossover_prob);
  fill("--mutation-prob", "mutation_prob", baseline.mutation_prob);
  fill("--backend", "backend", backend_opts.kind);
  fill("--sampler", "sampler", sampler_name);
  fill("--advisor", "advisor", advisor_opts.kind);
  fill("--baseline", "baseline", baseline_mode);
  if (!flag_given("--target-adrs") && cfg.contains("target_adrs")) {
    target_adrs = cfg["target_adrs"].get<double>();
    have_target = true;
  }
  baseline.seed = params.seed;
  baseline.n0 = params.n0;

  HlsDesign design = parse_design(read_file(design_file));
  DesignSpace space = make_space(design, space_opts);
  ProjectSettings project;
  auto backend = make_backend(backend_opts, project);
  auto advisor = make_advisor(advisor_opts);

  ExploreResult result;
  std::string mode;
  if (baseline_mode) {
    mode = "baseline_nsga2";
    SamplerSpec spec{sampler_kind_from_name(sampler_name), baseline.n0, baseline.seed,
                     params.alpha};
    SampleResult init;
    if (spec.kind == SamplerKind::warm_start) init = warm_start(*advisor, space, design, spec);
    else if (spec.kind == SamplerKind::beta) init = beta_sample(space, spec);
    else if (spec.kind == SamplerKind::lhs) init = lhs_sample(space, spec);
    else init = random_sample(space, spec);
    result = baseline_nsga2(design, space, *backend, init.configs, baseline);
    result.trajectory.degraded_advisor |= init.advisor_degraded;
  } else {
    mode = "explore";
    result = explore(design, space, *backend, *advisor, params);
  }

  nlohmann::json experiment = {{"design", design_file},
                               {"backend", backend_opts.kind},
                               {"advisor", advisor_opts.kind},
                               {"sampler", sampler_name},
                               {"mode", mode},
                               {"seed", baseline_mode ? baseline.seed : params.seed},
                               {"n0", baseline_mode ? baseline.n0 : params.n0},
                               {"i_max", params.i_max},
                               {"pop_size", params.pop_size},
                               {"generations", baseline.generations},
                               {"pruned", !space_opts.no_prune}};
  std::string config_hash = fnv_hex(experiment.dump());
  std::uint64_t seed = baseline_mode ? baseline.seed : params.seed;

  fs::create_directories(out_dir);

  {
    std::ofstream traj(fs::path(out_dir) / "trajectory.jsonl");
    nlohmann::json meta = {{"type", "meta"},
                           {"version", HLSDSE_VERSION},
                           {"seed", seed},
                           {"config_hash", config_hash},
                           {"kernel", design.kernel_name}};
    traj << meta.dump() << "\n";
    for (const auto& entry : result.trajectory.entries)
      traj << trajectory_entry_json(design, entry).dump() << "\n";
  }

  std::vector<FrontPoint> front;
  for (const auto& e : result.front)
    front.push_back({e.objectives.latency, e.objectives.util, e.config_id});
  write_file((fs::path(out_dir) / "front.csv").string(),
             front_to_csv(front, {std::string("hls-dse ") + HLSDSE_VERSION,
                                  "seed=" + std::to_string(seed),
                                  "config_hash=" + config_hash}));

  nlohmann::json summary = {{"version", HLSDSE_VERSION},
                            {"seed", seed},
                            {"config_hash", config_hash},
                            {"design", design_file},
                            {"kernel", design.kernel_name},
                            {"mode", mode},
                            {"backend", backend_opts.kind},
                            {"sampler", sampler_name},
                            {"advisor", advisor_opts.kind},
                            {"evaluations", result.trajectory.entries.size()},
                            {"budget_max", baseline_mode
                                               ? baseline.n0 + baseline.generations * baseline.n0
                                               : params.n0 + params.i_max * params.pop_size},
                            {"front_size", front.size()},
                            {"front", front_json(front)},
                            {"degraded_advisor", result.trajectory.degraded_advisor},
                            {"aborted", result.trajectory.aborted}};
  if (result.trajectory.aborted) summary["abort_reason"] = result.trajectory.abort_reason;
  if (!reference_path.empty()) {
    auto reference = reference_objectives(reference_path);
    std::vector<Objectives> explored;
    for (const auto& p : front) explored.push_back({p.latency, p.util});
    double score = adrs(explored, reference);
    if (std::isfinite(score)) summary["adrs"] = score;
    else summary["adrs"] = nullptr;
    if (have_target) {
      summary["target_adrs"] = target_adrs;
      summary["evals_to_target"] =
          evals_to_target_adrs(result.trajectory, reference, target_adrs);
    }
  }
  write_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");

  std::cout << summary.dump(2) << "\n";
  return result.trajectory.aborted ? kExitBackend : kExitOk;
}

int run_reference(const std::string& design_path, BackendOptions backend_opts,
                  SpaceOptions space_opts, bool exhaustive, std::int64_t budget,
                  std::uint64_t seed, const std::string& out_path) {
  HlsDesign design = parse_design(read_file(design_path));
  DesignSpace space = make_space(design, space_opts);
  ProjectSettings project;
  auto backend = make_backend(backend_opts, project);

  if (budget < 1 || budget > std::numeric_limits<int>::max())
    throw ParseError("reference: budget must be in [1, " +
                     std::to_string(std::numeric_limits<int>::max()) + "]");
  std::vector<DirectiveConfig> configs;
  std::string mode;
  if (exhaustive) {
    if (space.cardinality > BigUint(budget)) {
      std::cerr << "refusing exhaustive exploration: |space| = " << space.cardinality.str()
                << " exceeds budget " << budget << "\n";
      return kExitConfig;
    }
    SamplerSpec spec{SamplerKind::random, static_cast<int>(space.cardinality), seed, 0.1};
    configs = random_sample(space, spec).configs;  // enumeration path: all distinct points
    mode = "exhaustive";
  } else {
    SamplerSpec spec{SamplerKind::lhs, static_cast<int>(budget), seed, 0.1};
    auto sampled = lhs_sample(space, spec).configs;
    std::set<std::string> seen;
    for (auto& config : sampled)
      if (seen.insert(canonical_hash(design, config)).second) configs.push_back(std::move(config));
    mode = "stratified_random";
  }

  std::vector<EvaluatedDesign> evals;
  auto results = backend->evaluate_batch(design, configs);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!results[i].valid) continue;
    evals.push_back({configs[i], canonical_hash(design, configs[i]),
                     {static_cast<double>(results[i].latency), results[i].util}});
  }
  auto front = pareto_front(evals);

  nlohmann::json invocation = {{"design", design_path},
                               {"backend", backend_opts.kind},
                               {"mode", mode},
                               {"budget", budget},
                               {"seed", seed},
                               {"pruned", !space_opts.no_prune}};
  std::vector<FrontPoint> points;
  for (const auto& e : front)
    points.push_back({e.objectives.latency, e.objectives.util, e.config_id});
  write_file(out_path,
             front_to_csv(points, {std::string("hls-dse ") + HLSDSE_VERSION, "mode=" + mode,
                                   "coverage=" + std::to_string(configs.size()) +
                                       " distinct configs of |space|=" + space.cardinality.str(),
                                   "seed=" + std::to_string(seed),
                                   "config_hash=" + fnv_hex(invocation.dump())}));
  std::cout << "wrote " << out_path << " (" << points.size() << " points, " << mode
            << " over " << configs.size() << " evaluations)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective HLS directive design-space exploration"};
  app.set_version_flag("--version", std::string("hls-dse ") + HLSDSE_VERSION);
  app.require_subcommand(1);

  std::string design_path, out_path, config_records_path, source_path, rules_path;
  std::string reference_path, explored_path, out_dir = "out", exp_config_path;
  SpaceOptions space_opts;
  BackendOptions backend_opts;
  AdvisorOptions advisor_opts;
  SearchParams params;
  BaselineParams baseline;
  SamplerSpec sampler_spec;
  std::string sampler_name = "warm";
  ProjectSettings project;
  bool baseline_mode = false, exhaustive = false;
  std::int64_t budget = 1000;
  double target_adrs = 0.0;

  auto add_backend_flags = [&](CLI::App* cmd) {
    cmd->add_option("--backend", backend_opts.kind, "mock|replay|external")
        ->check(CLI::IsMember({"mock", "replay", "external"}));
    cmd->add_option("--replay-data", backend_opts.replay_data, "replay dataset (JSON lines)");
    cmd->add_option("--tool-cmd", backend_opts.tool_cmd, "external tool executable");
    cmd->add_option("--workdir", backend_opts.workdir, "external tool working directory root");
    cmd->add_option("--timeout", backend_opts.timeout_seconds, "per-evaluation cap in seconds");
    cmd->add_option("--workers", backend_opts.workers, "concurrent external tool processes");
    cmd->add_option("--mock-params", backend_opts.mock_params_path, "mock model params JSON");
  };
  auto add_advisor_flags = [&](CLI::App* cmd) {
    cmd->add_option("--advisor", advisor_opts.kind, "rule|http")
        ->check(CLI::IsMember({"rule", "http"}));
    cmd->add_option("--advisor-url", advisor_opts.endpoint, "chat endpoint (or HLS_DSE_ADVISOR_URL)");
    cmd->add_option("--advisor-model", advisor_opts.model, "model name (or HLS_DSE_ADVISOR_MODEL)");
    cmd->add_option("--prompt-dir", advisor_opts.prompt_dir, "prompt template directory");
    cmd->add_option("--transcript", advisor_opts.transcript, "advisor transcript JSONL path");
    cmd->add_option("--advisor-retries", advisor_opts.max_retries, "max retries per role call");
    cmd->add_option("--advisor-timeout", advisor_opts.timeout_seconds, "request timeout seconds");
  };
  auto add_space_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--no-prune", space_opts.no_prune, "skip structural pruning");
    cmd->add_option("--rules", space_opts.rules_path, "prune rule set JSON");
  };

  auto* cmd_extract = app.add_subcommand("extract", "extract design structure from source text");
  cmd_extract->add_option("--source", source_path, "kernel source file")->required();
  cmd_extract->add_option("--out", out_path, "output design JSON (default stdout)");
  add_advisor_flags(cmd_extract);

  auto* cmd_space = app.add_subcommand("space", "build the unpruned design space");
  cmd_space->add_option("--design", design_path)->required();
  cmd_space->add_option("--out", out_path);

  auto* cmd_prune = app.add_subcommand("prune", "build and prune the design space");
  cmd_prune->add_option("--design", design_path)->required();
  cmd_prune->add_option("--rules", rules_path, "prune rule set JSON");
  cmd_prune->add_option("--out", out_path);

  auto* cmd_sample = app.add_subcommand("sample", "draw initial samples (JSON lines)");
  cmd_sample->add_option("--design", design_path)->required();
  cmd_sample->add_option("--sampler", sampler_name, "random|beta|lhs|warm");
  cmd_sample->add_option("--n", sampler_spec.n, "sample count");
  cmd_sample->add_option("--seed", sampler_spec.seed, "PRNG seed");
  cmd_sample->add_option("--alpha", sampler_spec.alpha, "Beta shape");
  cmd_sample->add_option("--out", out_path);
  add_space_flags(cmd_sample);
  add_advisor_flags(cmd_sample);

  auto* cmd_emit = app.add_subcommand("emit-tcl", "render the synthesis script for a config");
  cmd_emit->add_option("--design", design_path)->required();
  cmd_emit->add_option("--config", config_records_path, "feature-record JSON file")->required();
  cmd_emit->add_option("--part", project.part);
  cmd_emit->add_option("--period", project.clock_period_ns);
  cmd_emit->add_option("--solution", project.solution);
  cmd_emit->add_option("--out", out_path);

  auto* cmd_reference = app.add_subcommand("reference", "build a reference Pareto front");
  cmd_reference->add_option("--design", design_path)->required();
  cmd_reference->add_option("--budget", budget, "evaluation budget");
  cmd_reference->add_flag("--exhaustive", exhaustive, "refuse unless |space| <= budget");
  cmd_reference->add_option("--seed", sampler_spec.seed);
  cmd_reference->add_option("--out", out_path)->required();
  add_space_flags(cmd_reference);
  add_backend_flags(cmd_reference);

  auto* cmd_explore = app.add_subcommand("explore", "run the adaptive exploration");
  cmd_explore->add_option("--design", design_path);
  cmd_explore->add_option("--config", exp_config_path, "experiment config JSON");
  cmd_explore->add_option("--sampler", sampler_name, "init sampler (baseline mode)");
  cmd_explore->add_option("--seed", params.seed);
  cmd_explore->add_option("--n0", params.n0);
  cmd_explore->add_option("--i-max", params.i_max);
  cmd_explore->add_option("--pop-size", params.pop_size);
  cmd_explore->add_option("--rank2-quota", params.rank2_quota);
  cmd_explore->add_flag("--baseline", baseline_mode, "run plain NSGA-II instead");
  cmd_explore->add_option("--generations", baseline.generations);
  cmd_explore->add_option("--crossover-prob", baseline.crossover_prob);
  cmd_explore->add_option("--mutation-prob", baseline.mutation_prob);
  cmd_explore->add_option("--reference", reference_path, "reference front CSV for ADRS");
  auto* target_opt = cmd_explore->add_option("--target-adrs", target_adrs);
  cmd_explore->add_option("--out-dir", out_dir);
  add_space_flags(cmd_explore);
  add_backend_flags(cmd_explore);
  add_advisor_flags(cmd_explore);

  auto* cmd_adrs = app.add_subcommand("adrs", "score an explored front against a reference");
  cmd_adrs->add_option("explored", explored_path, "explored front CSV")->required();
  cmd_adrs->add_option("reference", reference_path, "reference front CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_extract->parsed()) {
      auto advisor = make_advisor(advisor_opts);
      HlsDesign design = advisor->extract_features(read_file(source_path));
      std::string text = serialize_design(design) + "\n";
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
      return kExitOk;
    }
    if (cmd_space->parsed() || cmd_prune->parsed()) {
      HlsDesign design = parse_design(read_file(design_path));
      DesignSpace space = build_space(design);
      if (cmd_prune->parsed()) {
        PruneRuleSet rules;
        if (!rules_path.empty())
          rules = rules_from_json(nlohmann::json::parse(read_file(rules_path)));
        space = prune(space, design, rules);
      }
      std::string text = space_json(space).dump(2) + "\n";
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
      return kExitOk;
    }
    if (cmd_sample->parsed()) {
      HlsDesign design = parse_design(read_file(design_path));
      DesignSpace space = make_space(design, space_opts);
      sampler_spec.kind = sampler_kind_from_name(sampler_name);
      SampleResult result;
      if (sampler_spec.kind == SamplerKind::warm_start) {
        auto advisor = make_advisor(advisor_opts);
        result = warm_start(*advisor, space, design, sampler_spec);
      } else if (sampler_spec.kind == SamplerKind::beta) {
        result = beta_sample(space, sampler_spec);
      } else if (sampler_spec.kind == SamplerKind::lhs) {
        result = lhs_sample(space, sampler_spec);
      } else {
        result = random_sample(space, sampler_spec);
      }
      std::ostringstream lines;
      for (const auto& config : result.configs)
        lines << feature_vector_json(encode_feature_vector(design, config)).dump() << "\n";
      if (result.domain_exhausted)
        std::cerr << "warning: space exhausted, returned " << result.configs.size()
                  << " distinct configs\n";
      if (result.advisor_degraded)
        std::cerr << "warning: advisor unavailable, fell back to LHS\n";
      if (out_path.empty()) std::cout << lines.str();
      else write_file(out_path, lines.str());
      return kExitOk;
    }
    if (cmd_emit->parsed()) {
      HlsDesign design = parse_design(read_file(design_path));
      auto records = nlohmann::json::parse(read_file(config_records_path));
      DirectiveConfig config = config_from_records(design, records);
      std::string text = emit_tcl(design, config, project);
      if (out_path.empty()) std::cout << text;
      else write_file(out_path, text);
      return kExitOk;
    }
    if (cmd_reference->parsed())
      return run_reference(design_path, backend_opts, space_opts, exhaustive, budget,
                           sampler_spec.seed, out_path);
    if (cmd_explore->parsed()) {
      auto flag_given = [cmd_explore](const std::string& flag) {
        return cmd_explore->count(flag) > 0;
      };
      return run_explore(design_path, exp_config_path, backend_opts, advisor_opts, space_opts,
                         params, baseline, baseline_mode, sampler_name, out_dir, reference_path,
                         target_adrs, target_opt->count() > 0, flag_given);
    }
    if (cmd_adrs->parsed()) {
      auto explored_front = reference_objectives(explored_path);
      auto reference_front = reference_objectives(reference_path);
      double score = adrs(explored_front, reference_front);
      std::printf("%.6f\n", score);
      return kExitOk;
    }
  } catch (const AdvisorError& e) {
    std::cerr << "advisor error: " << e.what() << "\n";
    return kExitAdvisor;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitGeneric;
  }
  return kExitGeneric;
}
