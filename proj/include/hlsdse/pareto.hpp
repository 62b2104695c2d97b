#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "hlsdse/design.hpp"

namespace hlsdse {

/// The two minimized objectives of the exploration.
struct Objectives {
  double latency = 0.0;
  double util = 0.0;

  bool operator==(const Objectives&) const = default;
};

/// Weights of the scalar utilization objective. The printed weights sum to
/// 0.9; they are applied verbatim, not renormalized.
struct UtilWeights {
  double w_lut = 0.3;
  double w_ff = 0.25;
  double w_dsp = 0.3;
  double w_bram = 0.05;
};

double utilization(double lut, double ff, double dsp, double bram,
                   const UtilWeights& w = UtilWeights{});

/// Boundary designs of a front carry this maximum-priority crowding value.
inline constexpr double kCrowdingSentinel = std::numeric_limits<double>::infinity();

struct RankedDesign {
  DirectiveConfig config;
  std::string config_id;   // canonical hash
  Objectives objectives;
  int rank = 1;            // 1 = non-dominated
  double crowding = 0.0;
};

/// True iff a is no worse in both objectives and strictly better in one.
bool dominates(const Objectives& a, const Objectives& b);

/// Fast non-dominated sorting (domination counts over the pairwise
/// domination relation). Front k+1 is what becomes non-dominated once
/// fronts 1..k are removed; indices ascend within each front.
std::vector<std::vector<std::size_t>> non_dominated_sort(const std::vector<Objectives>& pop);

/// Crowding distances for one front: objectives are min-max normalized
/// over the front, each interior point gets the Manhattan distance between
/// its sorted neighbors summed across objectives, boundary points get the
/// sentinel. Fronts of size <= 2 are all-sentinel. A zero-range objective
/// contributes 0.
std::vector<double> crowding_distance(const std::vector<Objectives>& front);

/// Labels every design with its front rank and in-front crowding distance.
void label_population(std::vector<RankedDesign>& pop);

/// Elite screening: fills k slots from rank 1 by descending crowding while
/// reserving up to rank2_quota slots for rank-2 designs, then from
/// subsequent ranks; any remaining shortfall is topped up across ranks.
/// Deterministic tie-break by insertion index. k >= pop returns everything.
std::vector<RankedDesign> select_elites(const std::vector<RankedDesign>& pop, std::size_t k,
                                        std::size_t rank2_quota = 3);

struct EvaluatedDesign {
  DirectiveConfig config;
  std::string config_id;
  Objectives objectives;
};

/// Rank-1 subset sorted by latency ascending; duplicate objective vectors
/// collapse keeping the first config.
std::vector<EvaluatedDesign> pareto_front(const std::vector<EvaluatedDesign>& evals);

/// Average Distance to Reference Set: mean over reference designs of the
/// smallest relative degradation any explored design attains against them;
/// zero when the explored front matches or dominates the reference. Empty
/// explored front yields +infinity; reference objectives must be strictly
/// positive (throws ValidationError otherwise).
double adrs(const std::vector<Objectives>& explored, const std::vector<Objectives>& reference);

// ---------------------------------------------------------------------------
// Front files
// ---------------------------------------------------------------------------

struct FrontPoint {
  double latency = 0.0;
  double util = 0.0;
  std::string config_id;
};

/// CSV with a `latency,util,config_id` header; `meta` lines are emitted as
/// leading `# key=value` comments.
std::string front_to_csv(const std::vector<FrontPoint>& front,
                         const std::vector<std::string>& meta = {});

/// Parses a front CSV, skipping comments; throws ParseError naming the
/// offending line.
std::vector<FrontPoint> front_from_csv(const std::string& text);

nlohmann::json front_json(const std::vector<FrontPoint>& front);

}  // namespace hlsdse
