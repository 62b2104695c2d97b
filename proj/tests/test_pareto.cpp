#include <doctest.h>

#include <cmath>

#include "hlsdse/errors.hpp"
#include "hlsdse/pareto.hpp"
#include "hlsdse/rng.hpp"
#include "oracles.hpp"

using namespace hlsdse;

namespace {

std::vector<Objectives> random_population(Rng& rng, std::size_t n) {
  std::vector<Objectives> pop;
  for (std::size_t i = 0; i < n; ++i)
    pop.push_back({1.0 + 1000.0 * rng.uniform_real(), 0.01 + rng.uniform_real()});
  return pop;
}

std::vector<Objectives> random_front(Rng& rng, std::size_t n) {
  auto pop = random_population(rng, n);
  std::vector<Objectives> front;
  for (std::size_t i : oracle::domination_filter(pop)) front.push_back(pop[i]);
  return front;
}

}  // namespace

TEST_SUITE("pareto") {

TEST_CASE("utilization applies the published weights verbatim") {
  CHECK(utilization(0.1, 0.2, 0.0, 0.4) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(utilization(0, 0, 0, 0) == 0.0);
  // the printed weights sum to 0.9; they are not renormalized
  CHECK(utilization(1, 1, 1, 1) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("domination is strict improvement in at least one objective") {
  CHECK(dominates({100, 0.5}, {110, 0.6}));
  CHECK_FALSE(dominates({100, 0.5}, {100, 0.5}));
  CHECK_FALSE(dominates({100, 0.6}, {110, 0.5}));
  CHECK_FALSE(dominates({110, 0.5}, {100, 0.6}));
  CHECK(dominates({100, 0.5}, {100, 0.6}));
}

TEST_CASE("non-dominated sorting on hand-checked inputs") {
  auto fronts = non_dominated_sort({{1, 2}, {2, 1}, {3, 3}});
  REQUIRE(fronts.size() == 2);
  CHECK(fronts[0] == std::vector<std::size_t>{0, 1});
  CHECK(fronts[1] == std::vector<std::size_t>{2});

  auto identical = non_dominated_sort({{5, 5}, {5, 5}, {5, 5}});
  REQUIRE(identical.size() == 1);
  CHECK(identical[0].size() == 3);

  CHECK(non_dominated_sort({}).empty());
}

TEST_CASE("non-dominated sorting equals the peeling oracle") {
  Rng rng(64);
  for (int trial = 0; trial < 50; ++trial) {
    auto pop = random_population(rng, 64);
    CHECK(non_dominated_sort(pop) == oracle::peel_fronts(pop));
  }
}

TEST_CASE("crowding distance matches the hand fixture") {
  auto crowd = crowding_distance({{0, 1}, {0.5, 0.5}, {1, 0}});
  REQUIRE(crowd.size() == 3);
  CHECK(crowd[0] == kCrowdingSentinel);
  CHECK(crowd[2] == kCrowdingSentinel);
  // middle point: (1-0)/1 on each normalized axis, Manhattan sum 2
  CHECK(crowd[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("small fronts are all boundary") {
  CHECK(crowding_distance({{1, 2}, {2, 1}}) ==
        std::vector<double>{kCrowdingSentinel, kCrowdingSentinel});
  CHECK(crowding_distance({{1, 2}}) == std::vector<double>{kCrowdingSentinel});
}

TEST_CASE("degenerate objectives contribute zero") {
  // equal latency everywhere: that axis is guarded out, util axis remains
  auto crowd = crowding_distance({{1, 1}, {1, 2}, {1, 4}});
  CHECK(crowd[1] == doctest::Approx(1.0));  // (4-1)/3 normalized
}

TEST_CASE("crowding is invariant under positive affine rescaling") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    auto front = random_front(rng, 12);
    if (front.size() < 3) continue;
    auto base = crowding_distance(front);
    std::vector<Objectives> scaled;
    for (const auto& o : front) scaled.push_back({o.latency * 37.5 + 11.0, o.util * 0.01 + 3.0});
    auto rescaled = crowding_distance(scaled);
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (base[i] == kCrowdingSentinel) CHECK(rescaled[i] == kCrowdingSentinel);
      else CHECK(rescaled[i] == doctest::Approx(base[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("elite selection honors the rank-2 quota") {
  std::vector<RankedDesign> pop;
  for (int i = 0; i < 10; ++i)
    pop.push_back({{}, "r1_" + std::to_string(i), {double(i), double(10 - i)}, 1, double(i)});
  for (int i = 0; i < 5; ++i)
    pop.push_back({{}, "r2_" + std::to_string(i), {double(i), double(20 - i)}, 2, double(i)});

  auto elites = select_elites(pop, 8, 3);
  REQUIRE(elites.size() == 8);
  int from_rank1 = 0, from_rank2 = 0;
  for (const auto& e : elites) (e.rank == 1 ? from_rank1 : from_rank2)++;
  CHECK(from_rank1 == 5);
  CHECK(from_rank2 == 3);
  // most crowded first within each rank
  CHECK(elites[0].config_id == "r1_9");
  CHECK(elites[5].config_id == "r2_4");
}

TEST_CASE("elite selection edge cases") {
  std::vector<RankedDesign> single = {{{}, "only", {1, 1}, 1, kCrowdingSentinel}};
  CHECK(select_elites(single, 5, 3).size() == 1);

  std::vector<RankedDesign> pop;
  for (int i = 0; i < 6; ++i) pop.push_back({{}, "a" + std::to_string(i), {}, 1, double(i)});
  for (int i = 0; i < 6; ++i) pop.push_back({{}, "b" + std::to_string(i), {}, 2, double(i)});
  auto no_quota = select_elites(pop, 8, 0);  // pure truncation
  int rank2 = 0;
  for (const auto& e : no_quota) rank2 += e.rank == 2;
  CHECK(no_quota.size() == 8);
  CHECK(rank2 == 2);

  // quota still yields k when later ranks cannot fill the gap
  std::vector<RankedDesign> thin;
  for (int i = 0; i < 2; ++i) thin.push_back({{}, "t1_" + std::to_string(i), {}, 1, double(i)});
  for (int i = 0; i < 10; ++i) thin.push_back({{}, "t2_" + std::to_string(i), {}, 2, double(i)});
  CHECK(select_elites(thin, 8, 3).size() == 8);
}

TEST_CASE("elite selection is deterministic") {
  std::vector<RankedDesign> pop;
  for (int i = 0; i < 12; ++i)
    pop.push_back({{}, std::to_string(i), {}, 1 + i % 3, 1.0});  // crowding ties everywhere
  auto a = select_elites(pop, 6, 3);
  auto b = select_elites(pop, 6, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].config_id == b[i].config_id);
}

TEST_CASE("pareto_front filters, sorts, and deduplicates") {
  std::vector<EvaluatedDesign> evals = {{{}, "a", {1, 2}}, {{}, "b", {2, 1}}, {{}, "c", {2, 2}}};
  auto front = pareto_front(evals);
  REQUIRE(front.size() == 2);
  CHECK(front[0].config_id == "a");
  CHECK(front[1].config_id == "b");

  CHECK(pareto_front({{{}, "x", {3, 3}}}).size() == 1);
  CHECK(pareto_front({}).empty());

  std::vector<EvaluatedDesign> dup = {{{}, "first", {1, 1}}, {{}, "second", {1, 1}}};
  auto collapsed = pareto_front(dup);
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed[0].config_id == "first");
}

TEST_CASE("pareto_front equals the brute-force filter on random inputs") {
  Rng rng(500);
  auto pop = random_population(rng, 200);
  std::vector<EvaluatedDesign> evals;
  for (std::size_t i = 0; i < pop.size(); ++i)
    evals.push_back({{}, std::to_string(i), pop[i]});
  auto front = pareto_front(evals);
  auto expected = oracle::domination_filter(pop);
  CHECK(front.size() == expected.size());
  for (const auto& e : front) {
    bool found = false;
    for (std::size_t i : expected) found |= std::to_string(i) == e.config_id;
    CHECK(found);
  }
}

TEST_CASE("adrs matches the worked examples") {
  std::vector<Objectives> reference = {{100, 0.5}};
  CHECK(adrs(reference, reference) == 0.0);
  CHECK(adrs({{110, 0.6}}, reference) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(adrs({{90, 0.4}}, reference) == 0.0);  // dominating design: distance zero
  CHECK(std::isinf(adrs({}, reference)));
  CHECK_THROWS_AS(adrs({{1, 1}}, {}), ValidationError);
  CHECK_THROWS_AS(adrs({{1, 1}}, {{0.0, 0.5}}), ValidationError);
}

TEST_CASE("adrs is non-negative and anti-monotone in the explored front") {
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    auto reference = random_front(rng, 10);
    auto explored = random_population(rng, 8);
    double base = adrs(explored, reference);
    CHECK(base >= 0.0);
    auto augmented = explored;
    augmented.push_back(random_population(rng, 1)[0]);
    CHECK(adrs(augmented, reference) <= base + 1e-12);
  }
}

TEST_CASE("front CSV round trips and reports malformed lines") {
  std::vector<FrontPoint> front = {{515, 0.123456, "abc"}, {1024, 0.01, "def"}};
  std::string csv = front_to_csv(front, {"seed=7"});
  auto back = front_from_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].latency == 515);
  CHECK(back[1].config_id == "def");

  CHECK_THROWS_WITH_AS(front_from_csv("latency,util,config_id\n1,zzz,id\n"),
                       doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_AS(front_from_csv(""), ParseError);
}

}  // TEST_SUITE
