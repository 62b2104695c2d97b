#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "hlsdse/design.hpp"

namespace hlsdse {

using BigUint = boost::multiprecision::cpp_int;

/// Legal values per loop site; all vectors sorted ascending.
struct LoopDomain {
  std::vector<int> pipeline;            // subset of {0,1}
  std::vector<std::int64_t> unroll;     // always contains 0
};

/// Legal values per array site.
struct ArrayDomain {
  std::vector<int> type;                // subset of {complete, block, cyclic}
  std::vector<int> dim;                 // 1-based dimension indices
  std::vector<std::int64_t> factor;     // always contains 0
};

/// The unified design space: per-site value domains plus the exact
/// Cartesian-product cardinality. Sites are kept in design declaration
/// order so coordinate indices are stable.
struct DesignSpace {
  std::vector<std::pair<std::string, LoopDomain>> loop_domains;
  std::vector<std::pair<std::string, ArrayDomain>> array_domains;
  BigUint cardinality = 0;

  const LoopDomain* loop(std::string_view name) const;
  const ArrayDomain* array(std::string_view name) const;
};

/// One designer-supplied pruning step; only ever shrinks a domain.
/// action: "remove" deletes the listed values, "restrict" intersects the
/// domain with them. field: pipeline|unroll (loops), type|dim|factor
/// (arrays). The off value 0 of unroll/factor domains is always retained.
struct PruneRule {
  std::string site;
  std::string field;
  std::string action;
  std::vector<std::int64_t> values;
};

struct PruneRuleSet {
  std::int64_t large_trip_threshold = 64;
  std::int64_t max_unroll_cap = 64;
  int outer_pipeline_disable_depth = 3;
  std::vector<PruneRule> custom_rules;
};

/// Builds the unpruned space: unroll domains are {0} plus the divisors of
/// the trip count, factor domains {0} plus the divisors of each governed
/// dimension size (union over selectable dims), full type/dim/pipeline
/// domains.
DesignSpace build_space(const HlsDesign& design);

/// Applies the structural pruning rules:
///  (a) outer pipeline disabled for nests of depth >= outer_pipeline_disable_depth
///      or with an inner trip count above large_trip_threshold,
///  (b) outermost loops of multilayer nests lose unrolling,
///  (c) loops with multiple sibling sub-loops lose unrolling,
///  (d) children of imperfect loops lose unrolling,
///  (e) unroll values above max_unroll_cap removed where trip_count exceeds
///      large_trip_threshold,
/// then the custom rules, then recomputes cardinality. Throws
/// ValidationError for a rule naming an unknown site/field or emptying a
/// domain.
DesignSpace prune(const DesignSpace& space, const HlsDesign& design, const PruneRuleSet& rules);

/// Exact product of all domain sizes.
BigUint cardinality(const DesignSpace& space);

/// True iff every configured value lies in its domain and complete-type
/// partitions carry factor 0.
bool contains(const DesignSpace& space, const DirectiveConfig& config);

/// Clamps each out-of-domain value to the nearest in-domain value (ties
/// toward smaller) and zeroes factors of complete partitions. Keys naming
/// no site of the space are dropped. Idempotent; result passes contains().
DirectiveConfig repair(const DesignSpace& space, const DirectiveConfig& config);

/// Sorted divisors of n (n >= 1).
std::vector<std::int64_t> divisors(std::int64_t n);

nlohmann::json space_json(const DesignSpace& space);
PruneRuleSet rules_from_json(const nlohmann::json& j);
nlohmann::json rules_json(const PruneRuleSet& rules);

}  // namespace hlsdse
