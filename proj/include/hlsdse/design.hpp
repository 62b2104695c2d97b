#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hlsdse {

/// One loop of the kernel's loop forest. `accessed_arrays` lists
/// (array name, 1-based dimension index) pairs touched by the loop body.
struct LoopInfo {
  std::string name;
  std::int64_t trip_count = 1;
  bool is_perfect = false;
  std::vector<std::pair<std::string, int>> accessed_arrays;
  std::vector<LoopInfo> children;
};

struct ArrayInfo {
  std::string name;
  std::vector<std::int64_t> dims;
};

/// Structural metadata of one HLS kernel: the loop forest with trip counts
/// and the arrays with their dimensions. Immutable after construction;
/// validate() enforces the invariants.
struct HlsDesign {
  std::string kernel_name;
  std::vector<LoopInfo> loops;   // forest roots, declaration order
  std::vector<ArrayInfo> arrays;
  std::string source_path;       // empty -> kernel_name + ".cpp"

  std::string source_file() const {
    return source_path.empty() ? kernel_name + ".cpp" : source_path;
  }
};

/// Integer encoding of ARRAY_PARTITION types used throughout feature
/// vectors: complete=0, block=1, cyclic=2.
enum PartitionType : int { kPartitionComplete = 0, kPartitionBlock = 1, kPartitionCyclic = 2 };

struct LoopDirective {
  int pipeline = 0;           // 0 off, 1 on
  std::int64_t unroll = 0;    // 0 off; >=2 factor (1 is an alias of 0)

  bool operator==(const LoopDirective&) const = default;
};

struct ArrayDirective {
  int type = kPartitionCyclic;
  int dim = 1;                // 1-based
  std::int64_t factor = 0;    // 0 off (ignored when type=complete)

  bool operator==(const ArrayDirective&) const = default;
};

/// One point of the design space: per-loop pipeline/unroll and per-array
/// partition settings. Sites absent from the maps carry default (off)
/// values. Ordered maps keep iteration deterministic.
struct DirectiveConfig {
  std::map<std::string, LoopDirective> loop_directives;
  std::map<std::string, ArrayDirective> array_directives;

  bool operator==(const DirectiveConfig&) const = default;
};

/// Result of evaluating one configuration: latency in cycles plus
/// normalized resource ratios (may exceed 1 on over-mapping). Invalid
/// results (timeout/failure) carry no latency/util claims.
struct QoR {
  std::int64_t latency = 0;
  double lut = 0.0;
  double ff = 0.0;
  double dsp = 0.0;
  double bram = 0.0;
  double util = 0.0;
  bool valid = false;
  double eval_seconds = 0.0;
  std::string note;  // diagnostic for invalid results
};

// ---------------------------------------------------------------------------
// Validation and schema I/O
// ---------------------------------------------------------------------------

/// Checks all design invariants (unique names, positive trips/dims,
/// perfect-loop arity, accessed-array references). Throws ValidationError.
void validate(const HlsDesign& design);

/// Parses the JSON design schema
///   {kernel, loops:[{name,trip_count,is_perfect,accessed_arrays:[[a,d]],
///    children:[...]}], arrays:[{name,dims:[...]}]}
/// and returns a validated design. Throws ParseError / ValidationError
/// naming the offending field.
HlsDesign parse_design(const std::string& json_text);

/// Inverse of parse_design; parse_design(serialize_design(d)) == d.
std::string serialize_design(const HlsDesign& design);

bool operator==(const LoopInfo& a, const LoopInfo& b);
bool operator==(const ArrayInfo& a, const ArrayInfo& b);
bool operator==(const HlsDesign& a, const HlsDesign& b);

// ---------------------------------------------------------------------------
// Structure helpers
// ---------------------------------------------------------------------------

const LoopInfo* find_loop(const HlsDesign& design, std::string_view name);
const ArrayInfo* find_array(const HlsDesign& design, std::string_view name);

/// All loops in declaration (pre-order) order; pointers into `design`.
std::vector<const LoopInfo*> loops_preorder(const HlsDesign& design);

/// Parent of `name` in the forest, or nullptr for roots/unknown names.
const LoopInfo* parent_loop(const HlsDesign& design, std::string_view name);

/// Levels of the subtree rooted at `loop` (a leaf has depth 1).
int subtree_depth(const LoopInfo& loop);

// ---------------------------------------------------------------------------
// Feature vectors
// ---------------------------------------------------------------------------

struct LoopRecord {
  std::string name;
  int pipeline = 0;
  std::int64_t unroll = 0;
};

struct ArrayRecord {
  std::string name;
  int type = kPartitionCyclic;
  int dim = 1;
  std::int64_t factor = 0;
};

/// The tuple encoding of one configuration: one record per loop and per
/// array in design declaration order.
struct FeatureVector {
  std::vector<LoopRecord> loops;
  std::vector<ArrayRecord> arrays;
};

/// Encodes (design, config) as feature-vector records; sites absent from
/// the config get default values. Throws ValidationError on a config key
/// that names no loop/array of the design.
FeatureVector encode_feature_vector(const HlsDesign& design, const DirectiveConfig& config);

/// JSON array of records, loops first then arrays.
nlohmann::json feature_vector_json(const FeatureVector& fv);

/// Rebuilds a config from a feature-record array. Unknown names throw;
/// use `lenient=true` to drop unknown records instead (advisor guardrail).
DirectiveConfig config_from_records(const HlsDesign& design, const nlohmann::json& records,
                                    bool lenient = false);

// ---------------------------------------------------------------------------
// Canonical form
// ---------------------------------------------------------------------------

/// Canonicalizes a configuration: unroll<=1 -> 0; complete partitions get
/// factor 0; disabled partitions (non-complete, factor<=1) collapse to
/// (cyclic, dim 1, factor 0); all sites of the design present.
DirectiveConfig canonical_config(const HlsDesign& design, const DirectiveConfig& config);

/// Stable 64-bit FNV-1a hash of the canonical feature encoding, as 16 hex
/// chars. Equal iff the configurations request the same hardware.
std::string canonical_hash(const HlsDesign& design, const DirectiveConfig& config);

}  // namespace hlsdse
