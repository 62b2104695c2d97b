#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hlsdse/advisor.hpp"
#include "hlsdse/design.hpp"
#include "hlsdse/operators.hpp"
#include "hlsdse/pareto.hpp"
#include "hlsdse/qor.hpp"
#include "hlsdse/sampling.hpp"
#include "hlsdse/space.hpp"

namespace hlsdse {

/// Defaults mirror the published hyperparameter table: N0=12 warm-start
/// samples, 3 iterations of ~12 candidates, 3 rank-2 suboptimal slots.
struct SearchParams {
  int n0 = 12;
  int i_max = 3;
  int pop_size = 12;
  int rank2_quota = 3;
  double convergent_fraction = 0.5;
  std::uint64_t seed = 0;
  double alpha = 0.1;                 // warm-start backfill Beta shape
  std::int64_t trip_threshold = 64;   // divergent outer-loop unroll cutoff
  std::int64_t max_estimated_ii = 4;  // divergent II lower-bound rejection
};

/// Plain NSGA-II baseline settings.
struct BaselineParams {
  int n0 = 12;
  int generations = 8;
  double crossover_prob = 0.9;
  double mutation_prob = 0.3;
  std::uint64_t seed = 0;
};

enum class OpTag { warm, convergent, divergent, crossover, mutation };
const char* op_tag_name(OpTag tag);

struct TrajectoryEntry {
  int iteration = 0;
  OpTag op = OpTag::warm;
  DirectiveConfig config;
  std::string config_hash;
  QoR qor;
  std::vector<std::string> parents;  // canonical hashes of parent designs
  std::string note;
};

/// Append-only evaluation log; every evaluated configuration appears
/// exactly once (dedup by canonical hash).
struct Trajectory {
  std::vector<TrajectoryEntry> entries;
  std::set<std::string> hashes;
  bool degraded_advisor = false;
  bool aborted = false;
  std::string abort_reason;

  bool knows(const std::string& hash) const { return hashes.count(hash) > 0; }
  void append(TrajectoryEntry entry);
};

nlohmann::json trajectory_entry_json(const HlsDesign& design, const TrajectoryEntry& entry);

struct ExploreResult {
  std::vector<EvaluatedDesign> front;  // rank-1 over all valid evaluations
  Trajectory trajectory;
};

/// The adaptive optimization loop: warm-start, then i_max iterations of
/// elite screening with a rank-2 quota, bottleneck-oriented convergent
/// tuning and novelty-constrained divergent tuning, with environmental
/// selection in between. Total evaluations <= n0 + i_max * pop_size.
/// Backend transport failures abort the run; the partial trajectory is
/// returned with `aborted` set.
ExploreResult explore(const HlsDesign& design, const DesignSpace& space,
                      const QorBackend& backend, Advisor& advisor, const SearchParams& params);

/// Plain NSGA-II: binary tournament on (rank, crowding), per-pair uniform
/// crossover, per-coordinate mutation to a uniformly random domain value,
/// environmental selection. `init` supplies the initial population (from
/// any sampler).
ExploreResult baseline_nsga2(const HlsDesign& design, const DesignSpace& space,
                             const QorBackend& backend,
                             const std::vector<DirectiveConfig>& init,
                             const BaselineParams& params);

/// First trajectory prefix whose valid-front reaches `target` ADRS against
/// the reference; returns the full trajectory length when never reached.
std::size_t evals_to_target_adrs(const Trajectory& trajectory,
                                 const std::vector<Objectives>& reference, double target);

}  // namespace hlsdse
