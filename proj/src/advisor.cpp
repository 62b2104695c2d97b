#include "hlsdse/advisor.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "hlsdse/errors.hpp"

#ifndef HLSDSE_PROMPT_DIR
#define HLSDSE_PROMPT_DIR ""
#endif

namespace hlsdse {

const char* seed_objective_name(SeedObjective o) {
  switch (o) {
    case SeedObjective::performance: return "performance";
    case SeedObjective::resource: return "resource";
    default: return "balanced";
  }
}

// ---------------------------------------------------------------------------
// RuleAdvisor
// ---------------------------------------------------------------------------

HlsDesign RuleAdvisor::extract_features(const std::string&) {
  throw AdvisorError("extract_features", "unsupported by the rule advisor (generative role)");
}

std::vector<PruneRule> RuleAdvisor::prune_rules(const HlsDesign&, const DesignSpace&) {
  return {};  // the structural pruning layer is authoritative
}

namespace {

bool domain_allows_pipeline(const DesignSpace& space, const std::string& loop) {
  const LoopDomain* dom = space.loop(loop);
  return dom && std::find(dom->pipeline.begin(), dom->pipeline.end(), 1) != dom->pipeline.end();
}

std::vector<const LoopInfo*> leaf_loops(const HlsDesign& design) {
  std::vector<const LoopInfo*> out;
  for (const LoopInfo* loop : loops_preorder(design))
    if (loop->children.empty()) out.push_back(loop);
  return out;
}

/// Cyclic partition of the accessed dimension with the smallest in-domain
/// factor covering `unroll`.
void match_partitions(const HlsDesign& design, const DesignSpace& space, DirectiveConfig& config) {
  for (const LoopInfo* loop : loops_preorder(design)) {
    auto it = config.loop_directives.find(loop->name);
    std::int64_t u = it == config.loop_directives.end()
                         ? 1
                         : std::max<std::int64_t>(1, it->second.unroll);
    if (u <= 1) continue;
    for (const auto& [array, dim] : loop->accessed_arrays) {
      const ArrayDomain* dom = space.array(array);
      if (!dom) continue;
      ArrayDirective d;
      if (auto a = config.array_directives.find(array); a != config.array_directives.end())
        d = a->second;
      std::int64_t target = domain_value_at_least(dom->factor, u);
      if (target <= std::max<std::int64_t>(1, d.factor)) continue;
      if (std::find(dom->type.begin(), dom->type.end(), kPartitionCyclic) != dom->type.end())
        d.type = kPartitionCyclic;
      if (std::find(dom->dim.begin(), dom->dim.end(), dim) != dom->dim.end()) d.dim = dim;
      d.factor = target;
      config.array_directives[array] = d;
    }
  }
}

/// Deterministic seed ladders. Step k of each objective's ladder moves one
/// notch away from the regime's extreme so repeated requests stay diverse.
DirectiveConfig seed_ladder_config(const HlsDesign& design, const DesignSpace& space,
                                   SeedObjective objective, int step) {
  DirectiveConfig config;
  switch (objective) {
    case SeedObjective::performance: {
      for (const LoopInfo* leaf : leaf_loops(design)) {
        const LoopDomain* dom = space.loop(leaf->name);
        if (!dom) continue;
        LoopDirective d;
        if (domain_allows_pipeline(space, leaf->name)) d.pipeline = 1;
        auto pow2 = power_of_two_members(dom->unroll);
        if (!pow2.empty()) {
          int idx = std::max(0, static_cast<int>(pow2.size()) - 1 - step);
          d.unroll = pow2[static_cast<std::size_t>(idx)];
        }
        config.loop_directives[leaf->name] = d;
      }
      match_partitions(design, space, config);
      break;
    }
    case SeedObjective::resource: {
      // stay at zero parallelism; later steps toggle cheap options only
      if (step % 2 == 1)
        for (const LoopInfo* leaf : leaf_loops(design))
          if (domain_allows_pipeline(space, leaf->name))
            config.loop_directives[leaf->name].pipeline = 1;
      if (step >= 2) {
        std::int64_t factor = std::int64_t{1} << (step / 2);  // 2, 2, 4, 4, ...
        for (const auto& [name, dom] : space.array_domains) {
          ArrayDirective d;
          d.type = kPartitionCyclic;
          d.factor = domain_value_at_least(dom.factor, factor);
          if (d.factor >= 2) config.array_directives[name] = d;
        }
      }
      break;
    }
    case SeedObjective::balanced: {
      for (const LoopInfo* leaf : leaf_loops(design)) {
        const LoopDomain* dom = space.loop(leaf->name);
        if (!dom) continue;
        LoopDirective d;
        if (domain_allows_pipeline(space, leaf->name)) d.pipeline = 1;
        auto pow2 = power_of_two_members(dom->unroll);
        if (!pow2.empty()) {
          int idx = std::max(0, static_cast<int>(pow2.size()) / 2 - step);
          d.unroll = pow2[static_cast<std::size_t>(idx)];
        }
        config.loop_directives[leaf->name] = d;
      }
      match_partitions(design, space, config);
      break;
    }
  }
  return repair(space, config);
}

}  // namespace

std::vector<DirectiveConfig> RuleAdvisor::seed_directives(const HlsDesign& design,
                                                          const DesignSpace& space,
                                                          SeedObjective objective, int count) {
  if (count < 1) throw AdvisorError("seed_directives", "count must be >= 1");
  std::vector<DirectiveConfig> out;
  std::set<std::string> seen;
  for (int step = 0; static_cast<int>(out.size()) < count && step < count + 8; ++step) {
    DirectiveConfig config = seed_ladder_config(design, space, objective, step);
    if (seen.insert(canonical_hash(design, config)).second) out.push_back(std::move(config));
  }
  return out;
}

std::vector<ReflectionItem> RuleAdvisor::reflect_trajectory(const HlsDesign&,
                                                            const std::vector<ParentState>& parents,
                                                            const std::string&) {
  std::vector<ReflectionItem> out;
  for (std::size_t i = 0; i < parents.size(); ++i)
    out.push_back({i, bottleneck_name(parents[i].bottleneck)});
  return out;
}

std::vector<DirectiveConfig> RuleAdvisor::convergent_hints(
    const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
    const std::optional<Introspection>& intro) {
  std::vector<DirectiveConfig> out;
  for (const auto& parent : parents)
    if (auto child = convergent_child(design, space, parent, intro)) out.push_back(*child);
  return out;
}

std::vector<DirectiveConfig> RuleAdvisor::divergent_hints(
    const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
    const std::optional<Introspection>& intro) {
  // seed derived from the parent set so identical inputs replay identically
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : parents)
    for (unsigned char c : p.config_id) {
      h ^= c;
      h *= 1099511628211ull;
    }
  Rng rng(h);
  std::set<std::string> known;
  for (const auto& p : parents) known.insert(p.config_id);
  DivergentRules rules;
  if (intro) rules.ports_per_partition = intro->ports_per_partition;
  return divergent_candidates(design, space, parents, known, parents.size(), rng, rules);
}

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

std::string StubChatTransport::complete(const std::string& request_body) {
  requests.push_back(request_body);
  if (next_ >= responses_.size())
    throw AdvisorError("transport", "stub transport exhausted");
  return responses_[next_++];
}

TranscriptReplayTransport TranscriptReplayTransport::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AdvisorError("transport", "transcript not readable: " + path);
  TranscriptReplayTransport t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("response")) continue;
    t.responses_.push_back(j["response"].get<std::string>());
  }
  return t;
}

std::string TranscriptReplayTransport::complete(const std::string&) {
  if (next_ >= responses_.size())
    throw AdvisorError("transport", "transcript replay exhausted");
  return responses_[next_++];
}

namespace {

class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(const HttpAdvisorConfig& config) : config_(config) {
    if (config_.endpoint.empty())
      throw AdvisorError("transport", "no advisor endpoint configured (HLS_DSE_ADVISOR_URL)");
  }

  std::string complete(const std::string& request_body) override {
    httplib::Client client(config_.endpoint);
    auto secs = static_cast<time_t>(config_.timeout_seconds);
    auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(config_.path, headers, request_body, "application/json");
    if (!res)
      throw AdvisorError("transport", "request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw AdvisorError("transport", "HTTP status " + std::to_string(res->status));
    return res->body;
  }

 private:
  HttpAdvisorConfig config_;
};

}  // namespace

std::unique_ptr<ChatTransport> make_http_transport(const HttpAdvisorConfig& config) {
  return std::make_unique<HttpChatTransport>(config);
}

HttpAdvisorConfig http_config_from_env(HttpAdvisorConfig base) {
  if (base.endpoint.empty())
    if (const char* url = std::getenv("HLS_DSE_ADVISOR_URL")) base.endpoint = url;
  if (base.api_key.empty())
    if (const char* key = std::getenv("HLS_DSE_ADVISOR_KEY")) base.api_key = key;
  if (base.model.empty())
    if (const char* model = std::getenv("HLS_DSE_ADVISOR_MODEL")) base.model = model;
  return base;
}

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

PromptSet PromptSet::load(const std::string& dir) {
  namespace fs = std::filesystem;
  std::string resolved = dir;
  if (resolved.empty())
    if (const char* env = std::getenv("HLS_DSE_PROMPT_DIR")) resolved = env;
  if (resolved.empty()) resolved = HLSDSE_PROMPT_DIR;
  if (resolved.empty() || !fs::is_directory(resolved))
    throw AdvisorError("prompts", "prompt directory not found: '" + resolved + "'");

  PromptSet set;
  for (const char* role : {"extract_features", "prune_rules", "seed_directives",
                           "reflect_trajectory", "convergent_hints", "divergent_hints"}) {
    fs::path file = fs::path(resolved) / (std::string(role) + ".txt");
    std::ifstream in(file);
    if (!in) throw AdvisorError("prompts", "missing template " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    set.templates[role] = buffer.str();
  }
  return set;
}

std::string PromptSet::render(const std::string& role,
                              const std::map<std::string, std::string>& vars) const {
  auto it = templates.find(role);
  if (it == templates.end()) throw AdvisorError(role, "no prompt template");
  std::string text = it->second;
  for (const auto& [key, value] : vars) {
    std::string token = "{{" + key + "}}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
      text.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return text;
}

// ---------------------------------------------------------------------------
// HttpAdvisor
// ---------------------------------------------------------------------------

nlohmann::json extract_json_payload(const std::string& response_body, const std::string& role) {
  nlohmann::json body = nlohmann::json::parse(response_body, nullptr, false);
  if (body.is_discarded()) throw AdvisorError(role, "response body is not JSON");
  std::string content;
  try {
    content = body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw AdvisorError(role, "response lacks choices[0].message.content");
  }

  std::string inner = content;
  std::size_t fence = content.find("```");
  if (fence != std::string::npos) {
    std::size_t start = content.find('\n', fence);
    if (start == std::string::npos) throw AdvisorError(role, "unterminated code fence");
    std::size_t end = content.find("```", start);
    if (end == std::string::npos) throw AdvisorError(role, "unterminated code fence");
    inner = content.substr(start + 1, end - start - 1);
  }
  nlohmann::json payload = nlohmann::json::parse(inner, nullptr, false);
  if (payload.is_discarded())
    throw AdvisorError(role, "message content is not a valid JSON block");
  return payload;
}

HttpAdvisor::HttpAdvisor(HttpAdvisorConfig config, std::unique_ptr<ChatTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) transport_ = make_http_transport(config_);
  prompts_ = PromptSet::load(config_.prompt_dir);
}

nlohmann::json HttpAdvisor::call_role(const std::string& role, const std::string& prompt) {
  auto make_request = [&](const std::string& user_content) {
    nlohmann::json req = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages", nlohmann::json::array(
                         {{{"role", "system"},
                           {"content",
                            "You are an HLS directive tuning assistant. Reply with exactly one "
                            "fenced JSON block and nothing else."}},
                          {{"role", "user"}, {"content", user_content}}})}};
    return req.dump();
  };

  const int budget = 1 + std::max(0, config_.max_retries);
  std::string request = make_request(prompt);
  std::string last_error = "no attempts made";
  bool repair_pending = false;

  for (int attempt = 0; attempt < budget; ++attempt) {
    std::string body;
    try {
      ++requests_made_;
      body = transport_->complete(request);
    } catch (const AdvisorError& e) {
      last_error = e.what();
      if (!config_.transcript_path.empty()) {
        std::ofstream log(config_.transcript_path, std::ios::app);
        log << nlohmann::json({{"role", role}, {"request", request}, {"error", e.what()}}).dump()
            << "\n";
      }
      request = make_request(prompt);  // fresh retry after transport failure
      repair_pending = false;
      continue;
    }
    if (!config_.transcript_path.empty()) {
      std::ofstream log(config_.transcript_path, std::ios::app);
      log << nlohmann::json({{"role", role}, {"request", request}, {"response", body}}).dump()
          << "\n";
    }
    try {
      return extract_json_payload(body, role);
    } catch (const AdvisorError& e) {
      last_error = e.what();
      if (!repair_pending) {
        // one-shot repair re-prompt before falling back to a fresh retry
        request = make_request(prompt +
                               "\n\nYour previous reply could not be parsed (" + last_error +
                               "). Re-emit the answer as a single fenced JSON block only.");
        repair_pending = true;
      } else {
        request = make_request(prompt);
        repair_pending = false;
      }
    }
  }
  throw AdvisorError(role, "failed after " + std::to_string(budget) + " requests: " + last_error);
}

HlsDesign HttpAdvisor::extract_features(const std::string& source_text) {
  if (source_text.empty()) throw AdvisorError("extract_features", "empty source text");
  auto payload = call_role("extract_features",
                           prompts_.render("extract_features", {{"SOURCE", source_text}}));
  try {
    return parse_design(payload.dump());
  } catch (const std::exception& e) {
    throw AdvisorError("extract_features", e.what());
  }
}

std::vector<PruneRule> HttpAdvisor::prune_rules(const HlsDesign& design,
                                                const DesignSpace& space) {
  auto payload =
      call_role("prune_rules", prompts_.render("prune_rules", {{"DESIGN_JSON", serialize_design(design)},
                                                               {"SPACE_JSON", space_json(space).dump(2)}}));
  if (!payload.is_array()) throw AdvisorError("prune_rules", "expected a JSON array of rules");
  std::vector<PruneRule> rules;
  for (const auto& r : payload) {
    if (!r.is_object() || !r.contains("site") || !r.contains("field") || !r.contains("action"))
      throw AdvisorError("prune_rules", "rule missing site/field/action");
    PruneRule rule;
    rule.site = r["site"].get<std::string>();
    rule.field = r["field"].get<std::string>();
    rule.action = r["action"].get<std::string>();
    if (r.contains("values"))
      for (const auto& v : r["values"]) rule.values.push_back(v.get<std::int64_t>());
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

std::vector<DirectiveConfig> configs_from_payload(const nlohmann::json& payload,
                                                  const HlsDesign& design,
                                                  const DesignSpace& space,
                                                  const std::string& role) {
  if (!payload.is_array())
    throw AdvisorError(role, "expected a JSON array of feature-record lists");
  std::vector<DirectiveConfig> out;
  for (const auto& records : payload) {
    DirectiveConfig config;
    try {
      config = config_from_records(design, records, /*lenient=*/true);
    } catch (const std::exception& e) {
      throw AdvisorError(role, e.what());
    }
    config = repair(space, config);
    out.push_back(std::move(config));
  }
  if (out.empty()) throw AdvisorError(role, "advisor returned no configurations");
  return out;
}

nlohmann::json parents_json(const HlsDesign& design, const std::vector<ParentState>& parents) {
  auto arr = nlohmann::json::array();
  for (std::size_t i = 0; i < parents.size(); ++i)
    arr.push_back({{"index", i},
                   {"config", feature_vector_json(encode_feature_vector(design, parents[i].config))},
                   {"qor", qor_json(parents[i].qor)},
                   {"bottleneck", bottleneck_name(parents[i].bottleneck)}});
  return arr;
}

}  // namespace

std::vector<DirectiveConfig> HttpAdvisor::seed_directives(const HlsDesign& design,
                                                          const DesignSpace& space,
                                                          SeedObjective objective, int count) {
  if (count < 1) throw AdvisorError("seed_directives", "count must be >= 1");
  auto payload = call_role(
      "seed_directives",
      prompts_.render("seed_directives", {{"DESIGN_JSON", serialize_design(design)},
                                          {"SPACE_JSON", space_json(space).dump(2)},
                                          {"OBJECTIVE", seed_objective_name(objective)},
                                          {"COUNT", std::to_string(count)}}));
  return configs_from_payload(payload, design, space, "seed_directives");
}

std::vector<ReflectionItem> HttpAdvisor::reflect_trajectory(
    const HlsDesign& design, const std::vector<ParentState>& parents,
    const std::string& trajectory_digest) {
  auto payload = call_role(
      "reflect_trajectory",
      prompts_.render("reflect_trajectory", {{"PARENTS_JSON", parents_json(design, parents).dump(2)},
                                             {"TRAJECTORY_DIGEST", trajectory_digest}}));
  if (!payload.is_array())
    throw AdvisorError("reflect_trajectory", "expected a JSON array of {index, note}");
  std::vector<ReflectionItem> items;
  for (const auto& entry : payload) {
    if (!entry.is_object() || !entry.contains("index") || !entry["index"].is_number_integer())
      throw AdvisorError("reflect_trajectory", "entry missing integer field 'index'");
    auto idx = entry["index"].get<std::int64_t>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= parents.size())
      continue;  // out-of-range suggestions are dropped, never trusted
    items.push_back({static_cast<std::size_t>(idx), entry.value("note", std::string{})});
  }
  return items;
}

std::vector<DirectiveConfig> HttpAdvisor::convergent_hints(
    const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
    const std::optional<Introspection>&) {
  auto payload = call_role(
      "convergent_hints",
      prompts_.render("convergent_hints", {{"DESIGN_JSON", serialize_design(design)},
                                           {"SPACE_JSON", space_json(space).dump(2)},
                                           {"PARENTS_JSON", parents_json(design, parents).dump(2)}}));
  return configs_from_payload(payload, design, space, "convergent_hints");
}

std::vector<DirectiveConfig> HttpAdvisor::divergent_hints(
    const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
    const std::optional<Introspection>&) {
  auto payload = call_role(
      "divergent_hints",
      prompts_.render("divergent_hints", {{"DESIGN_JSON", serialize_design(design)},
                                          {"SPACE_JSON", space_json(space).dump(2)},
                                          {"PARENTS_JSON", parents_json(design, parents).dump(2)}}));
  return configs_from_payload(payload, design, space, "divergent_hints");
}

}  // namespace hlsdse
