#include <doctest.h>

#include "hlsdse/errors.hpp"
#include "hlsdse/operators.hpp"
#include "helpers.hpp"

using namespace hlsdse;

namespace {

ParentState make_parent(const HlsDesign& design, const MockBackend& backend,
                        DirectiveConfig config, std::optional<Introspection> intro) {
  ParentState parent;
  parent.qor = backend.evaluate(design, config);
  parent.config_id = canonical_hash(design, config);
  parent.config = std::move(config);
  parent.bottleneck = classify_bottleneck(design, parent.config, parent.qor, intro);
  return parent;
}

DirectiveConfig mul_config(int pipeline, std::int64_t unroll, std::int64_t factor) {
  DirectiveConfig config;
  config.loop_directives["mul"] = {pipeline, unroll};
  if (factor > 0)
    for (const char* array : {"A", "B", "C"})
      config.array_directives[array] = {kPartitionCyclic, 1, factor};
  return config;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("bottleneck classification follows the contention model") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  MockBackend backend;
  auto intro = backend.introspection();

  QoR q1 = backend.evaluate(design, mul_config(1, 4, 1));
  CHECK(classify_bottleneck(design, mul_config(1, 4, 1), q1, intro) ==
        Bottleneck::memory_bound);  // II = 2 from ports

  QoR q2 = backend.evaluate(design, mul_config(1, 4, 4));
  CHECK(classify_bottleneck(design, mul_config(1, 4, 4), q2, intro) ==
        Bottleneck::compute_bound);  // II = 1

  QoR q3 = backend.evaluate(design, DirectiveConfig{});
  CHECK(classify_bottleneck(design, DirectiveConfig{}, q3, intro) == Bottleneck::compute_bound);

  QoR invalid;
  CHECK_THROWS_AS(classify_bottleneck(design, DirectiveConfig{}, invalid, intro),
                  ValidationError);
}

TEST_CASE("heuristic classification works without introspection") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  MockBackend backend;
  QoR qor = backend.evaluate(design, mul_config(1, 4, 1));
  // without introspection the BRAM/DSP comparison plus per-iteration
  // latency heuristic decides; it must at least return a classification
  auto cls = classify_bottleneck(design, mul_config(1, 4, 1), qor, std::nullopt);
  CHECK((cls == Bottleneck::memory_bound || cls == Bottleneck::compute_bound));
  QoR base = backend.evaluate(design, DirectiveConfig{});
  CHECK(classify_bottleneck(design, DirectiveConfig{}, base, std::nullopt) ==
        Bottleneck::compute_bound);
}

TEST_CASE("critical loop is the largest latency contributor") {
  HlsDesign design = testing::load_fixture("prune_nest.json");
  MockBackend backend;
  auto intro = backend.introspection();
  // flat runs 1024 iterations, the k nest dominates it: 128^3 vs 1024
  CHECK(critical_loop(design, DirectiveConfig{}, intro) == "k");
  CHECK(critical_loop(design, DirectiveConfig{}, std::nullopt) == "k");  // deepest largest trip

  // unrolling the k nest away shifts the balance to the next-worst nest
  DirectiveConfig crushed;
  crushed.loop_directives["i"] = {0, 128};
  crushed.loop_directives["j"] = {0, 128};
  crushed.loop_directives["k"] = {0, 128};
  CHECK(critical_loop(design, crushed, intro) == "s1");  // 32*16*8 iterations
}

TEST_CASE("convergent tuning steps the unroll of compute-bound parents") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  MockBackend backend;
  auto intro = backend.introspection();

  ParentState parent = make_parent(design, backend, mul_config(1, 2, 4), intro);
  REQUIRE(parent.bottleneck == Bottleneck::compute_bound);
  auto child = convergent_child(design, space, parent, intro);
  REQUIRE(child.has_value());
  CHECK(child->loop_directives["mul"].unroll == 4);  // next domain value after 2
  CHECK(coordinate_distance(design, *child, parent.config) == 1);  // parameter preservation

  // at the top of the pruned domain there is nowhere to go
  DesignSpace pruned = prune(space, design, PruneRuleSet{});
  ParentState maxed = make_parent(design, backend, mul_config(1, 64, 64), intro);
  REQUIRE(maxed.bottleneck == Bottleneck::compute_bound);
  CHECK_FALSE(convergent_child(design, pruned, maxed, intro).has_value());
}

TEST_CASE("convergent tuning matches partitions for memory-bound parents") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  MockBackend backend;
  auto intro = backend.introspection();

  ParentState parent = make_parent(design, backend, mul_config(1, 4, 1), intro);
  REQUIRE(parent.bottleneck == Bottleneck::memory_bound);
  auto child = convergent_child(design, space, parent, intro);
  REQUIRE(child.has_value());
  for (const char* array : {"A", "B", "C"})
    CHECK(child->array_directives[array].factor == 4);  // meets the unroll factor
  CHECK(child->loop_directives["mul"].pipeline == 1);   // untouched
  CHECK(child->loop_directives["mul"].unroll == 4);     // untouched
}

TEST_CASE("memory-bound tuning pushes pipelining outward") {
  HlsDesign design = testing::load_fixture("mat8.json");
  DesignSpace space = build_space(design);
  MockBackend backend;
  auto intro = backend.introspection();

  DirectiveConfig config;
  config.loop_directives["col"] = {1, 4};
  config.array_directives["M"] = {kPartitionCyclic, 2, 1};
  ParentState parent = make_parent(design, backend, config, intro);
  REQUIRE(parent.bottleneck == Bottleneck::memory_bound);
  auto child = convergent_child(design, space, parent, intro);
  REQUIRE(child.has_value());
  CHECK(child->loop_directives["row"].pipeline == 1);  // one level outward
  CHECK(child->array_directives["M"].factor >= 4);
}

TEST_CASE("divergent candidates respect the feasibility rules") {
  HlsDesign design = testing::load_fixture("mat8.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  MockBackend backend;
  auto intro = backend.introspection();

  std::vector<ParentState> parents = {
      make_parent(design, backend, DirectiveConfig{}, intro)};
  std::set<std::string> known = {parents[0].config_id};
  Rng rng(17);
  auto candidates = divergent_candidates(design, space, parents, known, 6, rng);
  CHECK(!candidates.empty());
  for (const auto& candidate : candidates) {
    CHECK(contains(space, candidate));
    // innermost pipelining
    CHECK(candidate.loop_directives.at("col").pipeline == 1);
    CHECK(candidate.loop_directives.at("row").pipeline == 0);
    // power-of-two unrolls only
    std::int64_t u = candidate.loop_directives.at("col").unroll;
    CHECK(u > 0);
    CHECK((u & (u - 1)) == 0);
    // novelty: at least 2 coordinates away from every parent, unseen hash
    CHECK(coordinate_distance(design, candidate, parents[0].config) >= 2);
    CHECK_FALSE(known.count(canonical_hash(design, candidate)));
  }
}

TEST_CASE("power-of-two filtering matches the worked domain") {
  // trip 12 gives unroll domain {0,1,2,3,4,6,12}
  auto design = parse_design(
      R"({"kernel":"k","loops":[{"name":"l","trip_count":12}],"arrays":[]})");
  DesignSpace space = build_space(design);
  CHECK(space.loop("l")->unroll == std::vector<std::int64_t>{0, 1, 2, 3, 4, 6, 12});
  CHECK(power_of_two_members(space.loop("l")->unroll) == std::vector<std::int64_t>{1, 2, 4});
}

TEST_CASE("divergent candidates avoid known hashes") {
  HlsDesign design = testing::load_fixture("dot8.json");
  DesignSpace space = build_space(design);
  Rng probe(5);
  // forbid everything the generator would produce on its first pass, then
  // check the second pass yields none of them
  std::set<std::string> known;
  auto first = divergent_candidates(design, space, {}, known, 8, probe);
  for (const auto& c : first) known.insert(canonical_hash(design, c));
  Rng rng(5);
  auto second = divergent_candidates(design, space, {}, known, 8, rng);
  for (const auto& c : second) CHECK_FALSE(known.count(canonical_hash(design, c)));
}

TEST_CASE("domain helpers") {
  std::vector<std::int64_t> domain = {0, 1, 2, 4, 8};
  CHECK(domain_value_at_least(domain, 3) == 4);
  CHECK(domain_value_at_least(domain, 8) == 8);
  CHECK(domain_value_at_least(domain, 100) == 8);  // clamped to the largest
}

}  // TEST_SUITE
