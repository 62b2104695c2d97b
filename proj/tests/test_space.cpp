#include <doctest.h>

#include <algorithm>

#include "hlsdse/errors.hpp"
#include "hlsdse/space.hpp"
#include "helpers.hpp"

using namespace hlsdse;

namespace {

std::vector<std::int64_t> divisor_oracle(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 1; i <= n; ++i)
    if (n % i == 0) out.push_back(i);
  return out;
}

std::vector<std::int64_t> with_zero(std::vector<std::int64_t> v) {
  v.insert(v.begin(), 0);
  return v;
}

bool is_subset(const std::vector<std::int64_t>& small, const std::vector<std::int64_t>& big) {
  return std::all_of(small.begin(), small.end(), [&](std::int64_t v) {
    return std::find(big.begin(), big.end(), v) != big.end();
  });
}

HlsDesign design_from(const std::string& json) { return parse_design(json); }

}  // namespace

TEST_SUITE("space") {

TEST_CASE("build_space uses divisor domains") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  const LoopDomain* mul = space.loop("mul");
  REQUIRE(mul);
  CHECK(mul->pipeline == std::vector<int>{0, 1});
  CHECK(mul->unroll == with_zero(divisor_oracle(1024)));
  CHECK(mul->unroll.size() == 12);  // 0 plus the 11 divisors of 1024
  const ArrayDomain* a = space.array("A");
  REQUIRE(a);
  CHECK(a->type == std::vector<int>{0, 1, 2});
  CHECK(a->dim == std::vector<int>{1});
  CHECK(a->factor == with_zero(divisor_oracle(1024)));
}

TEST_CASE("prime trip counts give tiny unroll domains") {
  auto design = design_from(R"({"kernel":"k","loops":[{"name":"p","trip_count":7}],"arrays":[]})");
  DesignSpace space = build_space(design);
  CHECK(space.loop("p")->unroll == std::vector<std::int64_t>{0, 1, 7});
}

TEST_CASE("multi-dim factor domains are common divisors") {
  auto design = design_from(R"({"kernel":"k","loops":[{"name":"l","trip_count":2}],
    "arrays":[{"name":"M","dims":[8,12]}]})");
  DesignSpace space = build_space(design);
  CHECK(space.array("M")->factor == std::vector<std::int64_t>{0, 1, 2, 4});  // gcd(8,12)=4
  CHECK(space.array("M")->dim == std::vector<int>{1, 2});
}

TEST_CASE("cardinality is the exact product of domain sizes") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  BigUint expected = 1;
  expected *= 2 * 12;           // pipeline, unroll
  for (int arr = 0; arr < 3; ++arr) expected *= 3 * 1 * 12;
  CHECK(space.cardinality == expected);
  CHECK(cardinality(space) == expected);
}

TEST_CASE("size-1 domains contribute factor 1") {
  auto design = design_from(R"({"kernel":"k","loops":[{"name":"one","trip_count":1}],"arrays":[]})");
  DesignSpace space = build_space(design);
  // unroll domain {0,1}, pipeline {0,1}
  CHECK(space.cardinality == 4);
  PruneRuleSet rules;
  rules.custom_rules.push_back({"one", "pipeline", "restrict", {0}});
  DesignSpace pruned = prune(space, design, rules);
  CHECK(pruned.cardinality == 2);
}

TEST_CASE("structural pruning on the 3-deep nest") {
  HlsDesign design = testing::load_fixture("gemm3.json");
  DesignSpace pruned = prune(build_space(design), design, PruneRuleSet{});
  CHECK(pruned.loop("i")->pipeline == std::vector<int>{0});      // (a) depth-3 nest
  CHECK(pruned.loop("i")->unroll == std::vector<std::int64_t>{0});  // (b) outermost
  CHECK(pruned.loop("j")->pipeline == std::vector<int>{0, 1});   // depth 2, trips at threshold
  CHECK(pruned.cardinality < build_space(design).cardinality);
}

TEST_CASE("flat loops only see the cap rule") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace before = build_space(design);
  DesignSpace after = prune(before, design, PruneRuleSet{});
  CHECK(after.loop("mul")->pipeline == std::vector<int>{0, 1});
  // trip 1024 > 64: unroll values above 64 removed
  std::vector<std::int64_t> expected;
  for (auto v : before.loop("mul")->unroll)
    if (v <= 64) expected.push_back(v);
  CHECK(after.loop("mul")->unroll == expected);
  for (const char* arr : {"A", "B", "C"})
    CHECK(after.array(arr)->factor == before.array(arr)->factor);
}

TEST_CASE("sibling sub-loops lose unrolling") {
  auto design = design_from(R"({"kernel":"k","loops":[
    {"name":"outer","trip_count":4,"children":[
      {"name":"a","trip_count":4},{"name":"b","trip_count":4}]}],"arrays":[]})");
  DesignSpace pruned = prune(build_space(design), design, PruneRuleSet{});
  CHECK(pruned.loop("outer")->unroll == std::vector<std::int64_t>{0});  // (b) and (c)
}

TEST_CASE("children of imperfect loops lose unrolling") {
  auto design = design_from(R"({"kernel":"k","loops":[
    {"name":"outer","trip_count":4,"is_perfect":false,"children":[
      {"name":"inner","trip_count":8}]}],"arrays":[]})");
  DesignSpace pruned = prune(build_space(design), design, PruneRuleSet{});
  CHECK(pruned.loop("inner")->unroll == std::vector<std::int64_t>{0});  // (d)
  auto perfect = design_from(R"({"kernel":"k","loops":[
    {"name":"outer","trip_count":4,"is_perfect":true,"children":[
      {"name":"inner","trip_count":8}]}],"arrays":[]})");
  DesignSpace kept = prune(build_space(perfect), perfect, PruneRuleSet{});
  CHECK(kept.loop("inner")->unroll.size() > 1);
}

TEST_CASE("outer pipeline removal halves the nest subspace") {
  // 2-deep nest, inner trip above the threshold so only rule (a) touches
  // the outer pipeline domain
  auto design = design_from(R"({"kernel":"k","loops":[
    {"name":"outer","trip_count":16,"is_perfect":true,"children":[
      {"name":"inner","trip_count":128}]}],"arrays":[]})");
  DesignSpace pruned = prune(build_space(design), design, PruneRuleSet{});
  CHECK(pruned.loop("outer")->pipeline == std::vector<int>{0});
  BigUint with_rule = 1, without_rule = 1;
  for (const auto& [name, dom] : pruned.loop_domains) {
    with_rule *= BigUint(dom.pipeline.size()) * BigUint(dom.unroll.size());
    std::size_t pipeline_size = name == "outer" ? 2 : dom.pipeline.size();
    without_rule *= BigUint(pipeline_size) * BigUint(dom.unroll.size());
  }
  CHECK(without_rule == 2 * with_rule);
}

TEST_CASE("pruning is monotone on random designs") {
  HlsDesign designs[] = {testing::load_fixture("vector_mul.json"),
                         testing::load_fixture("gemm3.json"),
                         testing::load_fixture("prune_nest.json"),
                         testing::load_fixture("mat8.json")};
  for (const auto& design : designs) {
    DesignSpace before = build_space(design);
    DesignSpace after = prune(before, design, PruneRuleSet{});
    CHECK(after.cardinality <= before.cardinality);
    for (const auto& [name, dom] : after.loop_domains) {
      const LoopDomain* original = before.loop(name);
      CHECK(is_subset(dom.unroll, original->unroll));
      CHECK(is_subset({dom.pipeline.begin(), dom.pipeline.end()},
                      {original->pipeline.begin(), original->pipeline.end()}));
    }
  }
}

TEST_CASE("contains enforces membership and the complete rule") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  CHECK(contains(space, testing::vector_mul_config()));

  DirectiveConfig bad;
  bad.loop_directives["mul"] = {0, 3};  // 3 does not divide 1024
  CHECK_FALSE(contains(space, bad));

  DirectiveConfig complete_with_factor;
  complete_with_factor.array_directives["A"] = {kPartitionComplete, 1, 2};
  CHECK_FALSE(contains(space, complete_with_factor));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial)
    CHECK(contains(space, testing::random_config(space, rng)));
}

TEST_CASE("repair clamps to the nearest value, ties toward smaller") {
  // trip 4 gives unroll domain {0,1,2,4}: 3 is equidistant from 2 and 4
  auto design = design_from(R"({"kernel":"k","loops":[{"name":"l","trip_count":4}],
    "arrays":[{"name":"x","dims":[4]}]})");
  DesignSpace space = build_space(design);
  DirectiveConfig config;
  config.loop_directives["l"] = {1, 3};
  DirectiveConfig fixed = repair(space, config);
  CHECK(fixed.loop_directives["l"].unroll == 2);
  CHECK(contains(space, fixed));

  DirectiveConfig complete;
  complete.array_directives["x"] = {kPartitionComplete, 1, 4};
  CHECK(repair(space, complete).array_directives["x"].factor == 0);

  DirectiveConfig unknown;
  unknown.loop_directives["ghost"] = {1, 2};
  CHECK(repair(space, unknown).loop_directives.empty());
}

TEST_CASE("repair is idempotent") {
  HlsDesign design = testing::load_fixture("gemm3.json");
  DesignSpace space = prune(build_space(design), design, PruneRuleSet{});
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    DirectiveConfig config;
    config.loop_directives["k"] = {static_cast<int>(rng.uniform_index(2)),
                                   static_cast<std::int64_t>(rng.uniform_index(100))};
    config.array_directives["B"] = {static_cast<int>(rng.uniform_index(5)),
                                    static_cast<int>(rng.uniform_index(4)) + 1,
                                    static_cast<std::int64_t>(rng.uniform_index(200))};
    DirectiveConfig once = repair(space, config);
    CHECK(contains(space, once));
    CHECK(repair(space, once) == once);
  }
}

TEST_CASE("custom rules shrink and never grow") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DesignSpace space = build_space(design);
  PruneRuleSet rules;
  rules.custom_rules.push_back({"mul", "unroll", "remove", {512, 1024}});
  rules.custom_rules.push_back({"A", "type", "restrict", {1, 2}});
  DesignSpace pruned = prune(space, design, rules);
  const auto& unroll = pruned.loop("mul")->unroll;
  CHECK(std::find(unroll.begin(), unroll.end(), 512) == unroll.end());
  CHECK(pruned.array("A")->type == std::vector<int>{1, 2});

  // removing 0 from an unroll domain is ignored: 0 encodes "off"
  PruneRuleSet keep_zero;
  keep_zero.custom_rules.push_back({"mul", "unroll", "restrict", {2, 4}});
  DesignSpace restricted = prune(space, design, keep_zero);
  CHECK(restricted.loop("mul")->unroll == std::vector<std::int64_t>{0, 2, 4});

  PruneRuleSet unknown;
  unknown.custom_rules.push_back({"ghost", "unroll", "remove", {2}});
  CHECK_THROWS_AS(prune(space, design, unknown), ValidationError);

  PruneRuleSet empties;
  empties.custom_rules.push_back({"A", "type", "restrict", {9}});
  CHECK_THROWS_AS(prune(space, design, empties), ValidationError);
}

TEST_CASE("rule set round trips through JSON") {
  PruneRuleSet rules;
  rules.large_trip_threshold = 32;
  rules.custom_rules.push_back({"mul", "unroll", "remove", {1024}});
  PruneRuleSet back = rules_from_json(rules_json(rules));
  CHECK(back.large_trip_threshold == 32);
  REQUIRE(back.custom_rules.size() == 1);
  CHECK(back.custom_rules[0].site == "mul");
  CHECK_THROWS_AS(rules_from_json(nlohmann::json::parse(R"({"large_trip_threshold":0})")),
                  ValidationError);
}

}  // TEST_SUITE
