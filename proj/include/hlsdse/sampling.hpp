#pragma once

#include <cstdint>
#include <vector>

#include "hlsdse/advisor.hpp"
#include "hlsdse/design.hpp"
#include "hlsdse/rng.hpp"
#include "hlsdse/space.hpp"

namespace hlsdse {

enum class SamplerKind { random, beta, lhs, warm_start };

SamplerKind sampler_kind_from_name(const std::string& name);
const char* sampler_kind_name(SamplerKind kind);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::random;
  int n = 12;
  std::uint64_t seed = 0;
  double alpha = 0.1;  // Beta shape; < 1 gives the U-shaped boundary bias
};

struct SampleResult {
  std::vector<DirectiveConfig> configs;
  bool domain_exhausted = false;  // space had fewer distinct points than requested
  bool advisor_degraded = false;  // warm start fell back to LHS
};

/// n unique configurations, each coordinate drawn uniformly over its
/// ordered domain. Duplicates are re-drawn; when the space holds fewer
/// distinct points than n, all of them come back with domain_exhausted set.
SampleResult random_sample(const DesignSpace& space, const SamplerSpec& spec);

/// Coordinates drawn from Beta(alpha, alpha) on [0,1] and mapped to domain
/// indices by rounding; alpha < 1 concentrates samples at domain
/// boundaries. Uniqueness handling as in random_sample.
SampleResult beta_sample(const DesignSpace& space, const SamplerSpec& spec);

/// Latin hypercube: per dimension an independent random permutation places
/// exactly one sample in each of the n strata ((k-1)/n, k/n].
SampleResult lhs_sample(const DesignSpace& space, const SamplerSpec& spec);

/// Advisor-seeded warm start: n configurations split across the
/// performance / resource / balanced regimes (n/3 each, remainder to
/// balanced), repaired and membership-checked; shortfalls backfilled by
/// LHS. Advisor failure degrades to pure LHS with the same seed and sets
/// advisor_degraded.
SampleResult warm_start(Advisor& advisor, const DesignSpace& space, const HlsDesign& design,
                        const SamplerSpec& spec);

// Exposed internals (tested directly):

/// One Beta(alpha, alpha) draw via Johnk's method in log space.
double beta_draw(Rng& rng, double alpha);

/// The n-by-d pre-rounding LHS coordinate matrix.
std::vector<std::vector<double>> lhs_coordinates(int n, int d, Rng& rng);

/// Maps a unit coordinate to a domain index: round(x * (size - 1)).
std::size_t domain_index_for_unit(double x, std::size_t domain_size);

/// Total coordinate count of a space: 2 per loop + 3 per array.
std::size_t space_dimensions(const DesignSpace& space);

/// Builds a configuration from unit coordinates in site order (pipeline,
/// unroll per loop; type, dim, factor per array), fixing complete-type
/// partitions to factor 0.
DirectiveConfig config_from_unit_coords(const DesignSpace& space,
                                        const std::vector<double>& coords);

}  // namespace hlsdse
