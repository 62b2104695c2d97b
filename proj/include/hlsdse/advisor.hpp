#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hlsdse/design.hpp"
#include "hlsdse/operators.hpp"
#include "hlsdse/space.hpp"

namespace hlsdse {

enum class SeedObjective { performance, resource, balanced };
const char* seed_objective_name(SeedObjective o);

/// One suggested parent from trajectory reflection: index into the elite
/// shortlist plus a free-text note. The engine intersects the result with
/// the elite screen; advisors reorder within it, never override it.
struct ReflectionItem {
  std::size_t parent_index = 0;
  std::string note;
};

/// The advisor contract. Every implementation covers six roles; outputs
/// are schema-validated and repaired into the pruned space before use, so
/// raw advisor text never reaches the engine. Role failures throw
/// AdvisorError and callers degrade per their module contract.
class Advisor {
 public:
  virtual ~Advisor() = default;
  virtual std::string name() const = 0;

  virtual HlsDesign extract_features(const std::string& source_text) = 0;
  virtual std::vector<PruneRule> prune_rules(const HlsDesign& design,
                                             const DesignSpace& space) = 0;
  virtual std::vector<DirectiveConfig> seed_directives(const HlsDesign& design,
                                                       const DesignSpace& space,
                                                       SeedObjective objective, int count) = 0;
  virtual std::vector<ReflectionItem> reflect_trajectory(
      const HlsDesign& design, const std::vector<ParentState>& parents,
      const std::string& trajectory_digest) = 0;
  virtual std::vector<DirectiveConfig> convergent_hints(
      const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
      const std::optional<Introspection>& intro) = 0;
  virtual std::vector<DirectiveConfig> divergent_hints(
      const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
      const std::optional<Introspection>& intro) = 0;
};

// ---------------------------------------------------------------------------
// RuleAdvisor: deterministic, offline
// ---------------------------------------------------------------------------

/// Deterministic stand-in for the generative advisor. Seeds come from
/// fixed ladders per objective, reflection passes elites through with
/// bottleneck notes, and hints reproduce the search operators exactly.
/// extract_features is unsupported (extraction is inherently generative).
class RuleAdvisor : public Advisor {
 public:
  std::string name() const override { return "rule"; }

  HlsDesign extract_features(const std::string& source_text) override;
  std::vector<PruneRule> prune_rules(const HlsDesign& design, const DesignSpace& space) override;
  std::vector<DirectiveConfig> seed_directives(const HlsDesign& design, const DesignSpace& space,
                                               SeedObjective objective, int count) override;
  std::vector<ReflectionItem> reflect_trajectory(const HlsDesign& design,
                                                 const std::vector<ParentState>& parents,
                                                 const std::string& trajectory_digest) override;
  std::vector<DirectiveConfig> convergent_hints(const HlsDesign& design, const DesignSpace& space,
                                                const std::vector<ParentState>& parents,
                                                const std::optional<Introspection>& intro) override;
  std::vector<DirectiveConfig> divergent_hints(const HlsDesign& design, const DesignSpace& space,
                                               const std::vector<ParentState>& parents,
                                               const std::optional<Introspection>& intro) override;
};

// ---------------------------------------------------------------------------
// HTTP advisor: chat-completion JSON over HTTP
// ---------------------------------------------------------------------------

struct HttpAdvisorConfig {
  std::string endpoint;           // e.g. http://host:port
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model;
  double temperature = 0.2;
  int max_retries = 3;
  double timeout_seconds = 30.0;
  std::string prompt_dir;         // empty: HLS_DSE_PROMPT_DIR env, then built-in path
  std::string transcript_path;    // empty: no transcript log
};

/// Fills endpoint/api_key/model from HLS_DSE_ADVISOR_URL / _KEY / _MODEL
/// when unset.
HttpAdvisorConfig http_config_from_env(HttpAdvisorConfig base = {});

/// Transport seam: one chat completion round trip. Throws AdvisorError on
/// transport failure.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const std::string& request_body) = 0;
};

std::unique_ptr<ChatTransport> make_http_transport(const HttpAdvisorConfig& config);

/// Canned responses for tests; pops from the front per request.
class StubChatTransport : public ChatTransport {
 public:
  explicit StubChatTransport(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}
  std::string complete(const std::string& request_body) override;
  std::vector<std::string> requests;  // bodies seen, for assertions

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

/// Replays a transcript written by a previous HttpAdvisor run, making the
/// HTTP path deterministic in tests.
class TranscriptReplayTransport : public ChatTransport {
 public:
  static TranscriptReplayTransport from_file(const std::string& path);
  std::string complete(const std::string& request_body) override;

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

/// The six prompt templates (data assets, `{{PLACEHOLDER}}` substitution).
struct PromptSet {
  std::map<std::string, std::string> templates;  // role name -> template text
  static PromptSet load(const std::string& dir);
  std::string render(const std::string& role,
                     const std::map<std::string, std::string>& vars) const;
};

class HttpAdvisor : public Advisor {
 public:
  explicit HttpAdvisor(HttpAdvisorConfig config, std::unique_ptr<ChatTransport> transport = {});

  std::string name() const override { return "http"; }

  HlsDesign extract_features(const std::string& source_text) override;
  std::vector<PruneRule> prune_rules(const HlsDesign& design, const DesignSpace& space) override;
  std::vector<DirectiveConfig> seed_directives(const HlsDesign& design, const DesignSpace& space,
                                               SeedObjective objective, int count) override;
  std::vector<ReflectionItem> reflect_trajectory(const HlsDesign& design,
                                                 const std::vector<ParentState>& parents,
                                                 const std::string& trajectory_digest) override;
  std::vector<DirectiveConfig> convergent_hints(const HlsDesign& design, const DesignSpace& space,
                                                const std::vector<ParentState>& parents,
                                                const std::optional<Introspection>& intro) override;
  std::vector<DirectiveConfig> divergent_hints(const HlsDesign& design, const DesignSpace& space,
                                               const std::vector<ParentState>& parents,
                                               const std::optional<Introspection>& intro) override;

  int requests_made() const { return requests_made_; }

 private:
  /// One role call: render, request with the retry/repair policy, return
  /// the parsed JSON payload. At most 1 + max_retries HTTP requests.
  nlohmann::json call_role(const std::string& role, const std::string& prompt);

  HttpAdvisorConfig config_;
  std::unique_ptr<ChatTransport> transport_;
  PromptSet prompts_;
  int requests_made_ = 0;
};

/// Extracts the single fenced JSON block from a chat response body (falls
/// back to parsing the whole message content). Throws AdvisorError on
/// malformed payloads.
nlohmann::json extract_json_payload(const std::string& response_body, const std::string& role);

}  // namespace hlsdse
