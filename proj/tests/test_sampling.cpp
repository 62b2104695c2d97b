#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hlsdse/advisor.hpp"
#include "hlsdse/errors.hpp"
#include "hlsdse/sampling.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace hlsdse;

namespace {

struct FailingAdvisor : RuleAdvisor {
  std::vector<DirectiveConfig> seed_directives(const HlsDesign&, const DesignSpace&,
                                               SeedObjective, int) override {
    throw AdvisorError("seed_directives", "unreachable");
  }
};

/// Advisor that proposes out-of-domain unrolls; warm_start must repair them.
struct SloppyAdvisor : RuleAdvisor {
  std::vector<DirectiveConfig> seed_directives(const HlsDesign& design, const DesignSpace& space,
                                               SeedObjective objective, int count) override {
    auto configs = RuleAdvisor::seed_directives(design, space, objective, count);
    for (auto& config : configs)
      for (auto& [_, d] : config.loop_directives) d.unroll = 3;  // 3 divides nothing here
    return configs;
  }
};

std::set<std::string> hashes_of(const HlsDesign& design, const std::vector<DirectiveConfig>& cs) {
  std::set<std::string> out;
  for (const auto& c : cs) out.insert(canonical_hash(design, c));
  return out;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("random sampling is unique, in-domain, and seeded") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  SamplerSpec spec{SamplerKind::random, 12, 42, 0.1};
  SampleResult result = random_sample(space, spec);
  REQUIRE(result.configs.size() == 12);
  CHECK_FALSE(result.domain_exhausted);
  for (const auto& config : result.configs) CHECK(contains(space, config));
  CHECK(hashes_of(design, result.configs).size() == 12);

  SampleResult again = random_sample(space, spec);
  CHECK(hashes_of(design, again.configs) == hashes_of(design, result.configs));
  for (std::size_t i = 0; i < result.configs.size(); ++i)
    CHECK(again.configs[i] == result.configs[i]);
}

TEST_CASE("tiny spaces are exhausted deterministically") {
  // single loop of trip 1: the only live coordinate is the pipeline bit
  auto design = parse_design(R"({"kernel":"k","loops":[{"name":"one","trip_count":1}],"arrays":[]})");
  DesignSpace space = build_space(design);
  SampleResult two = random_sample(space, {SamplerKind::random, 2, 1, 0.1});
  CHECK(two.configs.size() == 2);  // pipeline off, pipeline on
  CHECK_FALSE(two.domain_exhausted);

  SampleResult four = random_sample(space, {SamplerKind::random, 4, 1, 0.1});
  CHECK(four.configs.size() == 2);  // unroll 0/1 alias: only 2 distinct points
  CHECK(four.domain_exhausted);
}

TEST_CASE("beta draws prefer the boundaries for alpha below one") {
  Rng rng(2025);
  const int n = 10000;
  int boundary = 0, center = 0;
  for (int i = 0; i < n; ++i) {
    double x = beta_draw(rng, 0.1);
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    if (x < 0.1 || x > 0.9) ++boundary;
    if (x > 0.4 && x < 0.6) ++center;
  }
  double boundary_mass = 2.0 * oracle::incomplete_beta_symmetric(0.1, 0.1);
  double center_mass = oracle::incomplete_beta_symmetric(0.6, 0.1) -
                       oracle::incomplete_beta_symmetric(0.4, 0.1);
  double margin = (boundary_mass - center_mass) / 2.0;
  CHECK(boundary_mass > 0.8);  // oracle sanity
  CHECK(center_mass < 0.04);
  CHECK(static_cast<double>(boundary - center) / n > margin);
  // empirical masses close to the quadrature oracle
  CHECK(std::abs(static_cast<double>(boundary) / n - boundary_mass) < 0.03);
  CHECK(std::abs(static_cast<double>(center) / n - center_mass) < 0.03);
}

TEST_CASE("beta with alpha one is uniform (KS at the 1% level)") {
  Rng rng(77);
  const int n = 10000;
  std::vector<double> draws;
  for (int i = 0; i < n; ++i) draws.push_back(beta_draw(rng, 1.0));
  std::sort(draws.begin(), draws.end());
  double d_stat = 0.0;
  for (int i = 0; i < n; ++i) {
    double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    d_stat = std::max({d_stat, std::abs(draws[static_cast<std::size_t>(i)] - lo),
                       std::abs(draws[static_cast<std::size_t>(i)] - hi)});
  }
  CHECK(d_stat < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("beta sampling stays in domain and respects size-1 domains") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  SampleResult result = beta_sample(space, {SamplerKind::beta, 12, 9, 0.1});
  CHECK(result.configs.size() == 12);
  for (const auto& config : result.configs) CHECK(contains(space, config));

  CHECK(domain_index_for_unit(0.0, 1) == 0);
  CHECK(domain_index_for_unit(1.0, 1) == 0);
  CHECK(domain_index_for_unit(0.49, 2) == 0);
  CHECK(domain_index_for_unit(0.51, 2) == 1);
}

TEST_CASE("lhs formula places one coordinate per stratum") {
  // by hand: permutation (1,2) with u=0.5 in both cells puts the samples
  // at 0.25 and 0.75
  CHECK((1.0 - 0.5) / 2.0 == 0.25);
  CHECK((2.0 - 0.5) / 2.0 == 0.75);

  Rng rng(13);
  for (int n : {2, 5, 12, 64}) {
    for (int d : {1, 3, 8}) {
      auto coords = lhs_coordinates(n, d, rng);
      REQUIRE(coords.size() == static_cast<std::size_t>(n));
      for (int j = 0; j < d; ++j) {
        std::set<int> strata;
        for (int i = 0; i < n; ++i) {
          double x = coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
          CHECK(x > 0.0);
          CHECK(x <= 1.0);
          // stratum k covers ((k-1)/n, k/n]
          strata.insert(static_cast<int>(std::ceil(x * n)));
        }
        CHECK(strata.size() == static_cast<std::size_t>(n));
      }
    }
  }
}

TEST_CASE("lhs sampling yields n in-domain configs") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  SampleResult result = lhs_sample(space, {SamplerKind::lhs, 12, 21, 0.1});
  REQUIRE(result.configs.size() == 12);
  for (const auto& config : result.configs) CHECK(contains(space, config));
  SampleResult again = lhs_sample(space, {SamplerKind::lhs, 12, 21, 0.1});
  for (std::size_t i = 0; i < 12; ++i) CHECK(again.configs[i] == result.configs[i]);
}

TEST_CASE("warm start splits across the three regimes") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  RuleAdvisor advisor;
  SampleResult result = warm_start(advisor, space, design, {SamplerKind::warm_start, 12, 5, 0.1});
  REQUIRE(result.configs.size() == 12);
  CHECK_FALSE(result.advisor_degraded);
  for (const auto& config : result.configs) CHECK(contains(space, config));
  CHECK(hashes_of(design, result.configs).size() == 12);

  // first third: aggressive (pipeline + the largest power-of-two unrolls)
  CHECK(result.configs[0].loop_directives["mul"].pipeline == 1);
  CHECK(result.configs[0].loop_directives["mul"].unroll == 64);  // capped by pruning
  CHECK(result.configs[0].array_directives["A"].factor == 64);
  // second third: conservative, no unrolling
  for (int i = 4; i < 8; ++i) {
    auto it = result.configs[static_cast<std::size_t>(i)].loop_directives.find("mul");
    if (it != result.configs[static_cast<std::size_t>(i)].loop_directives.end())
      CHECK(it->second.unroll <= 1);
  }
}

TEST_CASE("warm start repairs sloppy advisor output") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  SloppyAdvisor advisor;
  SampleResult result = warm_start(advisor, space, design, {SamplerKind::warm_start, 6, 5, 0.1});
  for (const auto& config : result.configs) CHECK(contains(space, config));
}

TEST_CASE("warm start falls back to lhs when the advisor is unreachable") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  FailingAdvisor advisor;
  SamplerSpec spec{SamplerKind::warm_start, 12, 31, 0.1};
  SampleResult degraded = warm_start(advisor, space, design, spec);
  CHECK(degraded.advisor_degraded);
  SampleResult lhs = lhs_sample(space, {SamplerKind::lhs, 12, 31, 0.1});
  REQUIRE(degraded.configs.size() == lhs.configs.size());
  for (std::size_t i = 0; i < lhs.configs.size(); ++i)
    CHECK(degraded.configs[i] == lhs.configs[i]);
}

TEST_CASE("sampler names parse") {
  CHECK(sampler_kind_from_name("warm") == SamplerKind::warm_start);
  CHECK(sampler_kind_from_name("lhs") == SamplerKind::lhs);
  CHECK_THROWS_AS(sampler_kind_from_name("sobol"), ValidationError);
}

}  // TEST_SUITE
