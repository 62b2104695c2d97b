#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hlsdse/design.hpp"
#include "hlsdse/qor.hpp"
#include "hlsdse/rng.hpp"
#include "hlsdse/space.hpp"

namespace hlsdse {

enum class Bottleneck { compute_bound, memory_bound };

const char* bottleneck_name(Bottleneck b);

/// Classifies a valid evaluation. With introspection, memory-bound means
/// some leaf's port-contention factor exceeds 1 (its unroll outruns the
/// partition bandwidth). Without it, a heuristic compares the BRAM/DSP
/// pressure and the per-iteration latency against the pipeline depth.
/// Throws ValidationError on an invalid QoR.
Bottleneck classify_bottleneck(const HlsDesign& design, const DirectiveConfig& config,
                               const QoR& qor, const std::optional<Introspection>& intro);

/// The leaf loop with the largest latency contribution under the
/// introspective model; without introspection, the deepest largest-trip
/// leaf.
std::string critical_loop(const HlsDesign& design, const DirectiveConfig& config,
                          const std::optional<Introspection>& intro);

/// One elite design plus the state the tuning rules need.
struct ParentState {
  DirectiveConfig config;
  std::string config_id;
  QoR qor;
  Bottleneck bottleneck = Bottleneck::compute_bound;
};

/// Oriented refinement of one parent. Compute-bound parents step the
/// critical loop's unroll to the next domain value; memory-bound parents
/// raise partition factors of touched arrays up to the accessing loop's
/// unroll and push pipelining one loop level outward. All other parent
/// values are preserved. Returns nullopt when the rules cannot move (the
/// parent is at its domain boundary).
std::optional<DirectiveConfig> convergent_child(const HlsDesign& design, const DesignSpace& space,
                                                const ParentState& parent,
                                                const std::optional<Introspection>& intro);

/// Knobs of the divergent generator.
struct DivergentRules {
  std::int64_t trip_threshold = 64;   // outer loops above this never unroll
  std::int64_t max_estimated_ii = 4;  // reject candidates with a worse II bound
  int ports_per_partition = 2;
};

/// Coordinate-wise difference count between two configurations over the
/// canonical feature encoding (2 coordinates per loop, 3 per array).
int coordinate_distance(const HlsDesign& design, const DirectiveConfig& a,
                        const DirectiveConfig& b);

/// Novelty-constrained candidate generation: power-of-two unrolls only,
/// pipelining at the innermost loop of each nest, partition factors
/// matched to the accessing loop's unroll, outer loops restricted by trip
/// count. Candidates must differ from every parent in >= 2 coordinates and
/// from every known hash in >= 1. Shortfalls are left to the caller.
std::vector<DirectiveConfig> divergent_candidates(
    const HlsDesign& design, const DesignSpace& space,
    const std::vector<ParentState>& parents, const std::set<std::string>& known_hashes,
    std::size_t count, Rng& rng, const DivergentRules& rules = DivergentRules{});

/// Power-of-two members (>0) of an ordered domain.
std::vector<std::int64_t> power_of_two_members(const std::vector<std::int64_t>& domain);

/// Smallest domain value >= target, if any; otherwise the largest value.
std::int64_t domain_value_at_least(const std::vector<std::int64_t>& domain, std::int64_t target);

}  // namespace hlsdse
