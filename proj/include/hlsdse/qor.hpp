#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlsdse/design.hpp"
#include "hlsdse/pareto.hpp"
#include "hlsdse/tcl.hpp"

namespace hlsdse {

/// Constants of the analytical cost model used as desk-scale ground truth.
/// Device totals resemble the ZCU106-class part targeted by the default
/// project settings.
struct MockModelParams {
  int ports_per_partition = 2;
  int pipeline_depth = 4;
  double dsp_per_parallel_op = 3.0;
  double lut_per_parallel_op = 250.0;
  double ff_per_pipeline_stage = 120.0;
  double dsp_total = 1728.0;
  double lut_total = 230400.0;
  double ff_total = 460800.0;
  double bram_total = 312.0;
  double overmap_threshold = 1.2;  // any ratio above this models synthesis failure
};

MockModelParams mock_params_from_json(const nlohmann::json& j);

/// What an introspective backend exposes about its timing model; enough to
/// reproduce per-loop initiation intervals.
struct Introspection {
  int ports_per_partition = 2;
  int pipeline_depth = 4;
};

/// Abstract evaluation backend. Implementations must be safe for
/// concurrent evaluate() calls; batch evaluation preserves input order.
/// Invalid designs come back as QoR{valid=false}; transport-level problems
/// throw BackendError instead.
class QorBackend {
 public:
  struct Capabilities {
    bool batch = false;
    bool introspection = false;
  };

  virtual ~QorBackend() = default;
  virtual QoR evaluate(const HlsDesign& design, const DirectiveConfig& config) const = 0;
  virtual std::vector<QoR> evaluate_batch(const HlsDesign& design,
                                          std::span<const DirectiveConfig> configs) const;
  virtual Capabilities capabilities() const = 0;
  virtual std::optional<Introspection> introspection() const { return std::nullopt; }
  /// Wall-clock cap per evaluation; only the external backend enforces it.
  virtual double timeout_seconds() const { return 1200.0; }
};

// ---------------------------------------------------------------------------
// Analytical mock model
// ---------------------------------------------------------------------------

/// Cycle count of the recursive loop-forest model. Effective unroll is
/// max(1, unroll), promoted to the full trip count below a pipelined loop.
/// Pipelined computations run at an initiation interval bounded by array
/// port contention; everything else costs pipeline_depth per iteration.
std::int64_t mock_latency(const HlsDesign& design, const DirectiveConfig& config,
                          const MockModelParams& params = MockModelParams{});

/// (lut, ff, dsp, bram) usage ratios of the model.
std::array<double, 4> mock_resources(const HlsDesign& design, const DirectiveConfig& config,
                                     const MockModelParams& params = MockModelParams{});

/// Per-leaf port-contention factor ceil(parallel_accesses/(factor*ports));
/// the worst value over a leaf's arrays, keyed by leaf loop name.
std::map<std::string, std::int64_t> mock_leaf_contention(const HlsDesign& design,
                                                         const DirectiveConfig& config,
                                                         int ports_per_partition);

/// Latency attributed to each leaf loop (ancestor iteration counts
/// included); a pipelined subtree's collapsed latency lands on its deepest
/// leaf. The values sum to mock_latency().
std::map<std::string, std::int64_t> mock_leaf_latency_contribution(
    const HlsDesign& design, const DirectiveConfig& config,
    const MockModelParams& params = MockModelParams{});

class MockBackend : public QorBackend {
 public:
  explicit MockBackend(MockModelParams params = MockModelParams{},
                       UtilWeights weights = UtilWeights{})
      : params_(params), weights_(weights) {}

  QoR evaluate(const HlsDesign& design, const DirectiveConfig& config) const override;
  Capabilities capabilities() const override { return {.batch = true, .introspection = true}; }
  std::optional<Introspection> introspection() const override {
    return Introspection{params_.ports_per_partition, params_.pipeline_depth};
  }
  const MockModelParams& params() const { return params_; }
  const UtilWeights& weights() const { return weights_; }

 private:
  MockModelParams params_;
  UtilWeights weights_;
};

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

/// Serves recorded QoR keyed by the canonical config hash. Dataset is JSON
/// lines {config_hash, latency, lut, ff, dsp, bram, valid, eval_seconds}.
/// An unknown key raises UnknownConfigError; results are never fabricated.
class ReplayBackend : public QorBackend {
 public:
  static ReplayBackend from_file(const std::string& path, UtilWeights weights = UtilWeights{});
  static ReplayBackend from_text(const std::string& jsonl, UtilWeights weights = UtilWeights{});

  QoR evaluate(const HlsDesign& design, const DirectiveConfig& config) const override;
  Capabilities capabilities() const override {
    return {.batch = true, .introspection = intro_.has_value()};
  }
  std::optional<Introspection> introspection() const override { return intro_; }
  /// Replays of introspective runs can carry the original model info so
  /// downstream classification follows the recorded decisions.
  void set_introspection(Introspection intro) { intro_ = intro; }
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, QoR> records_;
  UtilWeights weights_;
  std::optional<Introspection> intro_;
};

/// One dataset line for a recorded evaluation.
std::string replay_record_json(const std::string& config_hash, const QoR& qor);

// ---------------------------------------------------------------------------
// External tool backend
// ---------------------------------------------------------------------------

struct RawReport {
  std::int64_t latency_cycles = 0;
  double lut = 0, ff = 0, dsp = 0, bram = 0;
  double lut_total = 0, ff_total = 0, dsp_total = 0, bram_total = 0;
};

/// Parses a report; returns nullopt with `error` set when required fields
/// are missing.
using ReportParser = std::function<std::optional<RawReport>(const std::string& text,
                                                            std::string& error)>;

/// Default report grammar: flat `key=value` lines with keys latency_cycles,
/// lut, ff, dsp, bram and the matching *_total entries.
std::optional<RawReport> parse_kv_report(const std::string& text, std::string& error);

struct ExternalBackendConfig {
  std::string tool_cmd;                       // invoked as: tool_cmd script.tcl
  std::string workdir_root = ".";
  ProjectSettings project;
  UtilWeights weights;
  double timeout_seconds = 1200.0;            // HLS_DSE_TIMEOUT_SECS overrides
  int workers = 1;                            // bound on concurrent tool processes
  std::string report_filename = "report.txt";
  ReportParser parser;                        // defaults to parse_kv_report
};

/// Runs `<tool_cmd> <script.tcl>` in a per-evaluation working directory
/// under the wall-clock cap and parses the report it leaves behind.
/// Timeouts, nonzero exits, and missing/short reports yield valid=false
/// QoR with a diagnostic note; failure to launch throws BackendError.
class ExternalBackend : public QorBackend {
 public:
  explicit ExternalBackend(ExternalBackendConfig config);

  QoR evaluate(const HlsDesign& design, const DirectiveConfig& config) const override;
  std::vector<QoR> evaluate_batch(const HlsDesign& design,
                                  std::span<const DirectiveConfig> configs) const override;
  Capabilities capabilities() const override { return {.batch = true, .introspection = false}; }
  double timeout_seconds() const override { return config_.timeout_seconds; }

 private:
  ExternalBackendConfig config_;
};

/// Minimal process runner used by the external backend; exposed for tests.
struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  double seconds = 0.0;
  std::string stderr_tail;
};

ProcessResult run_with_timeout(const std::vector<std::string>& argv, const std::string& cwd,
                               double timeout_seconds);

/// QoR <-> JSON used by trajectories and replay datasets.
nlohmann::json qor_json(const QoR& qor);
QoR qor_from_json(const nlohmann::json& j);

}  // namespace hlsdse
