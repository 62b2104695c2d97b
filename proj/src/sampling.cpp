#include "hlsdse/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "hlsdse/errors.hpp"

namespace hlsdse {

SamplerKind sampler_kind_from_name(const std::string& name) {
  if (name == "random") return SamplerKind::random;
  if (name == "beta") return SamplerKind::beta;
  if (name == "lhs") return SamplerKind::lhs;
  if (name == "warm" || name == "warm_start") return SamplerKind::warm_start;
  throw ValidationError("unknown sampler '" + name + "'");
}

const char* sampler_kind_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::random: return "random";
    case SamplerKind::beta: return "beta";
    case SamplerKind::lhs: return "lhs";
    default: return "warm";
  }
}

std::size_t space_dimensions(const DesignSpace& space) {
  return 2 * space.loop_domains.size() + 3 * space.array_domains.size();
}

std::size_t domain_index_for_unit(double x, std::size_t domain_size) {
  if (domain_size <= 1) return 0;
  x = std::clamp(x, 0.0, 1.0);
  auto idx = static_cast<std::size_t>(std::llround(x * static_cast<double>(domain_size - 1)));
  return std::min(idx, domain_size - 1);
}

namespace {

/// Per-coordinate value lists in site order (pipeline, unroll per loop;
/// type, dim, factor per array).
std::vector<std::vector<std::int64_t>> flatten_domains(const DesignSpace& space) {
  std::vector<std::vector<std::int64_t>> flat;
  flat.reserve(space_dimensions(space));
  for (const auto& [_, dom] : space.loop_domains) {
    flat.emplace_back(dom.pipeline.begin(), dom.pipeline.end());
    flat.push_back(dom.unroll);
  }
  for (const auto& [_, dom] : space.array_domains) {
    flat.emplace_back(dom.type.begin(), dom.type.end());
    flat.emplace_back(dom.dim.begin(), dom.dim.end());
    flat.push_back(dom.factor);
  }
  return flat;
}

DirectiveConfig assemble(const DesignSpace& space, const std::vector<std::int64_t>& values) {
  DirectiveConfig config;
  std::size_t k = 0;
  for (const auto& [name, _] : space.loop_domains) {
    LoopDirective d;
    d.pipeline = static_cast<int>(values[k++]);
    d.unroll = values[k++];
    config.loop_directives[name] = d;
  }
  for (const auto& [name, _] : space.array_domains) {
    ArrayDirective d;
    d.type = static_cast<int>(values[k++]);
    d.dim = static_cast<int>(values[k++]);
    d.factor = values[k++];
    if (d.type == kPartitionComplete) d.factor = 0;
    config.array_directives[name] = d;
  }
  return config;
}

/// Canonical dedup key over the space's sites (no design needed): unroll
/// aliases collapse to 0, disabled partitions to (cyclic, 1, 0).
std::string sample_key(const DesignSpace& space, const DirectiveConfig& config) {
  std::ostringstream key;
  for (const auto& [name, _] : space.loop_domains) {
    LoopDirective d;
    if (auto it = config.loop_directives.find(name); it != config.loop_directives.end())
      d = it->second;
    key << name << '|' << (d.pipeline ? 1 : 0) << '|' << (d.unroll <= 1 ? 0 : d.unroll) << ';';
  }
  for (const auto& [name, _] : space.array_domains) {
    ArrayDirective d;
    if (auto it = config.array_directives.find(name); it != config.array_directives.end())
      d = it->second;
    if (d.type == kPartitionComplete) d.factor = 0;
    else if (d.factor <= 1) d = ArrayDirective{};
    key << name << '|' << d.type << '|' << d.dim << '|' << d.factor << ';';
  }
  return key.str();
}

/// Exhaustive path for small spaces: every distinct point, deterministic
/// order, so `n >= |space|` provably exhausts the domain.
SampleResult sample_by_enumeration(const DesignSpace& space, const SamplerSpec& spec) {
  auto flat = flatten_domains(space);
  std::vector<DirectiveConfig> unique;
  std::set<std::string> seen;
  std::vector<std::size_t> counter(flat.size(), 0);
  while (true) {
    std::vector<std::int64_t> values(flat.size());
    for (std::size_t j = 0; j < flat.size(); ++j) values[j] = flat[j][counter[j]];
    DirectiveConfig config = assemble(space, values);
    if (seen.insert(sample_key(space, config)).second) unique.push_back(std::move(config));
    std::size_t j = 0;
    for (; j < flat.size(); ++j) {
      if (++counter[j] < flat[j].size()) break;
      counter[j] = 0;
    }
    if (j == flat.size()) break;
  }

  Rng rng(spec.seed);
  SampleResult result;
  auto n = static_cast<std::size_t>(spec.n);
  if (unique.size() <= n) {
    result.configs = std::move(unique);
    result.domain_exhausted = result.configs.size() < n;
    return result;
  }
  // partial Fisher-Yates: uniform n-subset in random order
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + rng.uniform_index(unique.size() - i);
    std::swap(unique[i], unique[j]);
  }
  unique.resize(n);
  result.configs = std::move(unique);
  return result;
}

bool small_enough_to_enumerate(const DesignSpace& space, int n) {
  BigUint limit = std::max<std::int64_t>(4096, 16 * static_cast<std::int64_t>(n));
  return space.cardinality <= limit;
}

/// Shared draw-until-unique loop for the distribution-based samplers.
SampleResult sample_with_redraw(const DesignSpace& space, const SamplerSpec& spec,
                                const std::function<DirectiveConfig(Rng&)>& draw) {
  Rng rng(spec.seed);
  SampleResult result;
  std::set<std::string> seen;
  auto n = static_cast<std::size_t>(spec.n);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 10 * n;
  while (result.configs.size() < n && attempts++ < max_attempts) {
    DirectiveConfig config = draw(rng);
    if (seen.insert(sample_key(space, config)).second) result.configs.push_back(std::move(config));
  }
  result.domain_exhausted = result.configs.size() < n;
  return result;
}

}  // namespace

DirectiveConfig config_from_unit_coords(const DesignSpace& space,
                                        const std::vector<double>& coords) {
  auto flat = flatten_domains(space);
  if (coords.size() != flat.size())
    throw ValidationError("coordinate vector has wrong dimension");
  std::vector<std::int64_t> values(flat.size());
  for (std::size_t j = 0; j < flat.size(); ++j)
    values[j] = flat[j][domain_index_for_unit(coords[j], flat[j].size())];
  return assemble(space, values);
}

SampleResult random_sample(const DesignSpace& space, const SamplerSpec& spec) {
  if (spec.n < 1) throw ValidationError("sampler: n must be >= 1");
  if (small_enough_to_enumerate(space, spec.n)) return sample_by_enumeration(space, spec);
  auto flat = flatten_domains(space);
  return sample_with_redraw(space, spec, [&](Rng& rng) {
    std::vector<std::int64_t> values(flat.size());
    for (std::size_t j = 0; j < flat.size(); ++j)
      values[j] = flat[j][rng.uniform_index(flat[j].size())];
    return assemble(space, values);
  });
}

double beta_draw(Rng& rng, double alpha) {
  if (alpha <= 0.0) throw ValidationError("beta sampler: alpha must be > 0");
  // Johnk's method in log space: X = U^(1/a), Y = V^(1/a), accepted when
  // X + Y <= 1; stable for the tiny alpha values the U-shape needs.
  for (int attempt = 0; attempt < 4096; ++attempt) {
    double u = rng.uniform_real();
    double v = rng.uniform_real();
    if (u <= 0.0 || v <= 0.0) continue;
    double lx = std::log(u) / alpha;
    double ly = std::log(v) / alpha;
    double m = std::max(lx, ly);
    double lsum = m + std::log(std::exp(lx - m) + std::exp(ly - m));
    if (lsum <= 0.0) return std::exp(lx - lsum);
  }
  return 0.5;  // acceptance rate >= 1/2 for alpha <= 1; not reached
}

SampleResult beta_sample(const DesignSpace& space, const SamplerSpec& spec) {
  if (spec.n < 1) throw ValidationError("sampler: n must be >= 1");
  auto flat = flatten_domains(space);
  return sample_with_redraw(space, spec, [&](Rng& rng) {
    std::vector<std::int64_t> values(flat.size());
    for (std::size_t j = 0; j < flat.size(); ++j) {
      double x = beta_draw(rng, spec.alpha);
      values[j] = flat[j][domain_index_for_unit(x, flat[j].size())];
    }
    return assemble(space, values);
  });
}

std::vector<std::vector<double>> lhs_coordinates(int n, int d, Rng& rng) {
  // coordinate of sample i in dimension j: (pi_j(i) - u_ij) / n with
  // pi_j a fresh permutation of 1..n, placing one sample per stratum
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(d)));
  for (int j = 0; j < d; ++j) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (int i = 0; i < n; ++i) {
      double u = rng.uniform_real();  // in [0,1): coordinate lands in ((k-1)/n, k/n]
      coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          (static_cast<double>(perm[static_cast<std::size_t>(i)]) - u) / static_cast<double>(n);
    }
  }
  return coords;
}

SampleResult lhs_sample(const DesignSpace& space, const SamplerSpec& spec) {
  if (spec.n < 1) throw ValidationError("sampler: n must be >= 1");
  Rng rng(spec.seed);
  auto coords = lhs_coordinates(spec.n, static_cast<int>(space_dimensions(space)), rng);
  SampleResult result;
  for (const auto& row : coords) result.configs.push_back(config_from_unit_coords(space, row));
  return result;
}

SampleResult warm_start(Advisor& advisor, const DesignSpace& space, const HlsDesign& design,
                        const SamplerSpec& spec) {
  if (spec.n < 1) throw ValidationError("sampler: n must be >= 1");
  const int third = spec.n / 3;
  const std::vector<std::pair<SeedObjective, int>> plan = {
      {SeedObjective::performance, third},
      {SeedObjective::resource, third},
      {SeedObjective::balanced, spec.n - 2 * third}};

  SampleResult result;
  std::set<std::string> seen;
  try {
    for (const auto& [objective, count] : plan) {
      if (count == 0) continue;
      auto configs = advisor.seed_directives(design, space, objective, count);
      int taken = 0;
      for (auto& config : configs) {
        if (taken >= count) break;
        DirectiveConfig repaired = repair(space, config);
        if (!contains(space, repaired)) continue;  // guardrail; repair makes this unreachable
        if (!seen.insert(sample_key(space, repaired)).second) continue;
        result.configs.push_back(std::move(repaired));
        ++taken;
      }
    }
  } catch (const AdvisorError&) {
    SampleResult fallback = lhs_sample(space, spec);
    fallback.advisor_degraded = true;
    return fallback;
  }

  // backfill any shortfall with stratified samples
  for (std::uint64_t round = 0; result.configs.size() < static_cast<std::size_t>(spec.n) &&
                                round < 10;
       ++round) {
    SamplerSpec fill = spec;
    fill.seed = spec.seed + round;
    for (auto& config : lhs_sample(space, fill).configs) {
      if (result.configs.size() >= static_cast<std::size_t>(spec.n)) break;
      if (seen.insert(sample_key(space, config)).second)
        result.configs.push_back(std::move(config));
    }
  }
  result.domain_exhausted = result.configs.size() < static_cast<std::size_t>(spec.n);
  return result;
}

}  // namespace hlsdse
