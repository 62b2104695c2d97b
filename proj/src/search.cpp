#include "hlsdse/search.hpp"

#include <algorithm>
#include <sstream>

#include "hlsdse/errors.hpp"

namespace hlsdse {

const char* op_tag_name(OpTag tag) {
  switch (tag) {
    case OpTag::warm: return "warm";
    case OpTag::convergent: return "convergent";
    case OpTag::divergent: return "divergent";
    case OpTag::crossover: return "crossover";
    default: return "mutation";
  }
}

void Trajectory::append(TrajectoryEntry entry) {
  if (!hashes.insert(entry.config_hash).second)
    throw ValidationError("trajectory: duplicate evaluation of config " + entry.config_hash);
  entries.push_back(std::move(entry));
}

nlohmann::json trajectory_entry_json(const HlsDesign& design, const TrajectoryEntry& entry) {
  nlohmann::json j = {{"type", "eval"},
                      {"iteration", entry.iteration},
                      {"op", op_tag_name(entry.op)},
                      {"config_hash", entry.config_hash},
                      {"config", feature_vector_json(encode_feature_vector(design, entry.config))},
                      {"qor", qor_json(entry.qor)},
                      {"parents", entry.parents}};
  if (!entry.note.empty()) j["note"] = entry.note;
  return j;
}

namespace {

struct Engine {
  const HlsDesign& design;
  const DesignSpace& space;
  const QorBackend& backend;
  Trajectory trajectory;

  /// Evaluates a batch of novel configs and logs them. Returns false when
  /// the backend failed at the transport level (trajectory flagged).
  bool evaluate_batch(std::vector<TrajectoryEntry> pending) {
    std::vector<DirectiveConfig> configs;
    configs.reserve(pending.size());
    for (const auto& e : pending) configs.push_back(e.config);
    std::vector<QoR> results;
    try {
      results = backend.evaluate_batch(design, configs);
    } catch (const BackendError& e) {
      trajectory.aborted = true;
      trajectory.abort_reason = e.what();
      return false;
    }
    for (std::size_t i = 0; i < pending.size(); ++i) {
      pending[i].qor = results[i];
      trajectory.append(std::move(pending[i]));
    }
    return true;
  }

  std::vector<RankedDesign> valid_population() const {
    std::vector<RankedDesign> pop;
    for (const auto& e : trajectory.entries)
      if (e.qor.valid)
        pop.push_back({e.config, e.config_hash,
                       {static_cast<double>(e.qor.latency), e.qor.util}});
    return pop;
  }

  std::vector<EvaluatedDesign> final_front() const {
    std::vector<EvaluatedDesign> evals;
    for (const auto& e : trajectory.entries)
      if (e.qor.valid)
        evals.push_back({e.config, e.config_hash,
                         {static_cast<double>(e.qor.latency), e.qor.util}});
    return pareto_front(evals);
  }

  const QoR& qor_of(const std::string& hash) const {
    for (const auto& e : trajectory.entries)
      if (e.config_hash == hash) return e.qor;
    throw ValidationError("trajectory: unknown hash " + hash);
  }
};

std::string trajectory_digest(const Trajectory& trajectory) {
  std::ostringstream out;
  for (const auto& e : trajectory.entries) {
    out << e.config_hash << ' ' << op_tag_name(e.op);
    if (e.qor.valid) out << " latency=" << e.qor.latency << " util=" << e.qor.util;
    else out << " invalid";
    out << '\n';
  }
  return out.str();
}

/// Environmental selection: keep the best pop_size designs by
/// (rank, crowding, insertion order).
std::vector<RankedDesign> manage_population(std::vector<RankedDesign> pop, std::size_t pop_size) {
  if (pop.empty()) return pop;
  label_population(pop);
  std::vector<std::size_t> order(pop.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pop[a].rank != pop[b].rank) return pop[a].rank < pop[b].rank;
    return pop[a].crowding > pop[b].crowding;
  });
  std::vector<RankedDesign> kept;
  for (std::size_t i = 0; i < order.size() && kept.size() < pop_size; ++i)
    kept.push_back(pop[order[i]]);
  return kept;
}

}  // namespace

ExploreResult explore(const HlsDesign& design, const DesignSpace& space,
                      const QorBackend& backend, Advisor& advisor, const SearchParams& params) {
  Engine engine{design, space, backend, {}};
  auto intro = backend.introspection();
  Rng rng(params.seed);

  // line 1: warm-start initial sampling
  SamplerSpec warm_spec{SamplerKind::warm_start, params.n0, params.seed, params.alpha};
  SampleResult init = warm_start(advisor, space, design, warm_spec);
  engine.trajectory.degraded_advisor = init.advisor_degraded;

  // line 2: evaluate the initial population
  std::vector<TrajectoryEntry> batch;
  for (auto& config : init.configs) {
    TrajectoryEntry entry;
    entry.iteration = 0;
    entry.op = OpTag::warm;
    entry.config_hash = canonical_hash(design, config);
    entry.config = std::move(config);
    if (engine.trajectory.knows(entry.config_hash)) continue;
    bool fresh = true;
    for (const auto& other : batch) fresh &= other.config_hash != entry.config_hash;
    if (fresh) batch.push_back(std::move(entry));
  }
  if (!engine.evaluate_batch(std::move(batch)))
    return {engine.final_front(), std::move(engine.trajectory)};

  std::vector<RankedDesign> population = engine.valid_population();

  for (int iteration = 1; iteration <= params.i_max; ++iteration) {
    auto pop_size = static_cast<std::size_t>(params.pop_size);
    std::vector<TrajectoryEntry> candidates;
    std::set<std::string> pending;
    auto is_novel = [&](const std::string& hash) {
      return !engine.trajectory.knows(hash) && !pending.count(hash);
    };
    auto push_candidate = [&](DirectiveConfig config, OpTag tag,
                              std::vector<std::string> parents, std::string note) {
      std::string hash = canonical_hash(design, config);
      if (!is_novel(hash)) return false;
      pending.insert(hash);
      TrajectoryEntry entry;
      entry.iteration = iteration;
      entry.op = tag;
      entry.config = std::move(config);
      entry.config_hash = std::move(hash);
      entry.parents = std::move(parents);
      entry.note = std::move(note);
      candidates.push_back(std::move(entry));
      return true;
    };

    std::vector<ParentState> parents;
    if (!population.empty()) {
      // line 4/5: label, screen elites, let the advisor reflect on them
      label_population(population);
      auto elites = select_elites(population, pop_size,
                                  static_cast<std::size_t>(params.rank2_quota));
      for (const auto& elite : elites) {
        ParentState state;
        state.config = elite.config;
        state.config_id = elite.config_id;
        state.qor = engine.qor_of(elite.config_id);
        state.bottleneck = classify_bottleneck(design, state.config, state.qor, intro);
        parents.push_back(std::move(state));
      }
      try {
        auto shortlist =
            advisor.reflect_trajectory(design, parents, trajectory_digest(engine.trajectory));
        std::vector<ParentState> reordered;
        std::set<std::size_t> taken;
        for (const auto& item : shortlist)
          if (item.parent_index < parents.size() && taken.insert(item.parent_index).second)
            reordered.push_back(parents[item.parent_index]);
        if (!reordered.empty()) parents = std::move(reordered);
      } catch (const AdvisorError&) {
        engine.trajectory.degraded_advisor = true;  // rule-only reflection
      }
    }

    // line 6: oriented convergent candidates for half the batch
    auto conv_target = std::min(
        pop_size, static_cast<std::size_t>(std::llround(
                      params.convergent_fraction * static_cast<double>(params.pop_size))));
    for (const auto& parent : parents) {
      if (candidates.size() >= conv_target) break;
      if (auto child = convergent_child(design, space, parent, intro))
        push_candidate(std::move(*child), OpTag::convergent, {parent.config_id},
                       bottleneck_name(parent.bottleneck));
    }
    if (!parents.empty() && candidates.size() < conv_target) {
      try {
        for (auto& hint : advisor.convergent_hints(design, space, parents, intro)) {
          if (candidates.size() >= conv_target) break;
          push_candidate(repair(space, hint), OpTag::convergent, {}, "advisor");
        }
      } catch (const AdvisorError&) {
        engine.trajectory.degraded_advisor = true;
      }
    }

    // line 7: novelty-constrained divergent candidates for the rest
    DivergentRules div_rules;
    div_rules.trip_threshold = params.trip_threshold;
    div_rules.max_estimated_ii = params.max_estimated_ii;
    if (intro) div_rules.ports_per_partition = intro->ports_per_partition;
    if (!parents.empty()) {
      try {
        for (auto& hint : advisor.divergent_hints(design, space, parents, intro)) {
          if (candidates.size() >= pop_size) break;
          DirectiveConfig repaired = repair(space, hint);
          bool far_enough = true;
          for (const auto& parent : parents)
            if (coordinate_distance(design, repaired, parent.config) < 2) far_enough = false;
          if (!far_enough) continue;
          push_candidate(std::move(repaired), OpTag::divergent, {}, "advisor");
        }
      } catch (const AdvisorError&) {
        engine.trajectory.degraded_advisor = true;
      }
    }
    if (candidates.size() < pop_size) {
      std::set<std::string> known = engine.trajectory.hashes;
      known.insert(pending.begin(), pending.end());
      Rng div_rng = rng.fork();
      for (auto& config : divergent_candidates(design, space, parents, known,
                                               pop_size - candidates.size(), div_rng, div_rules))
        push_candidate(std::move(config), OpTag::divergent, {}, "");
    }
    // shortfall: novelty-filtered random backfill keeps the batch full
    if (candidates.size() < pop_size) {
      SamplerSpec fill{SamplerKind::random, params.pop_size, rng.next(), params.alpha};
      for (auto& config : random_sample(space, fill).configs) {
        if (candidates.size() >= pop_size) break;
        push_candidate(std::move(config), OpTag::divergent, {}, "backfill");
      }
    }

    // line 8: evaluate the batch
    if (!engine.evaluate_batch(std::move(candidates)))
      return {engine.final_front(), std::move(engine.trajectory)};

    // line 9: adaptive population management (environmental selection)
    population = manage_population(engine.valid_population(),
                                   static_cast<std::size_t>(params.pop_size));
  }

  // lines 10-12: rank-1 front over everything evaluated
  return {engine.final_front(), std::move(engine.trajectory)};
}

namespace {

/// Flattened coordinate view used by the genetic operators.
struct CoordinateView {
  std::vector<std::pair<std::string, int>> slots;  // site name, field index

  explicit CoordinateView(const DesignSpace& space) {
    for (const auto& [name, _] : space.loop_domains)
      for (int f = 0; f < 2; ++f) slots.emplace_back(name, f);
    for (const auto& [name, _] : space.array_domains)
      for (int f = 2; f < 5; ++f) slots.emplace_back(name, f);
  }

  static std::int64_t get(const DirectiveConfig& c, const std::pair<std::string, int>& slot) {
    const auto& [name, field] = slot;
    if (field < 2) {
      LoopDirective d;
      if (auto it = c.loop_directives.find(name); it != c.loop_directives.end()) d = it->second;
      return field == 0 ? d.pipeline : d.unroll;
    }
    ArrayDirective d;
    if (auto it = c.array_directives.find(name); it != c.array_directives.end()) d = it->second;
    if (field == 2) return d.type;
    if (field == 3) return d.dim;
    return d.factor;
  }

  static void set(DirectiveConfig& c, const std::pair<std::string, int>& slot, std::int64_t v) {
    const auto& [name, field] = slot;
    if (field < 2) {
      auto& d = c.loop_directives[name];
      if (field == 0) d.pipeline = static_cast<int>(v);
      else d.unroll = v;
      return;
    }
    auto& d = c.array_directives[name];
    if (field == 2) d.type = static_cast<int>(v);
    else if (field == 3) d.dim = static_cast<int>(v);
    else d.factor = v;
  }

  std::vector<std::int64_t> domain_of(const DesignSpace& space, std::size_t idx) const {
    const auto& [name, field] = slots[idx];
    if (field < 2) {
      const LoopDomain* dom = space.loop(name);
      if (field == 0) return {dom->pipeline.begin(), dom->pipeline.end()};
      return dom->unroll;
    }
    const ArrayDomain* dom = space.array(name);
    if (field == 2) return {dom->type.begin(), dom->type.end()};
    if (field == 3) return {dom->dim.begin(), dom->dim.end()};
    return dom->factor;
  }
};

}  // namespace

ExploreResult baseline_nsga2(const HlsDesign& design, const DesignSpace& space,
                             const QorBackend& backend,
                             const std::vector<DirectiveConfig>& init,
                             const BaselineParams& params) {
  Engine engine{design, space, backend, {}};
  Rng rng(params.seed);
  CoordinateView view(space);

  std::vector<TrajectoryEntry> batch;
  for (const auto& config : init) {
    TrajectoryEntry entry;
    entry.iteration = 0;
    entry.op = OpTag::warm;
    entry.config = config;
    entry.config_hash = canonical_hash(design, config);
    if (engine.trajectory.knows(entry.config_hash)) continue;
    bool fresh = true;
    for (const auto& other : batch) fresh &= other.config_hash != entry.config_hash;
    if (fresh) batch.push_back(std::move(entry));
  }
  if (!engine.evaluate_batch(std::move(batch)))
    return {engine.final_front(), std::move(engine.trajectory)};

  auto pop_size = static_cast<std::size_t>(params.n0);
  std::vector<RankedDesign> population =
      manage_population(engine.valid_population(), pop_size);

  for (int gen = 1; gen <= params.generations; ++gen) {
    if (population.empty()) break;
    label_population(population);

    auto tournament = [&]() -> const RankedDesign& {
      std::size_t a = rng.uniform_index(population.size());
      std::size_t b = rng.uniform_index(population.size());
      const RankedDesign& da = population[a];
      const RankedDesign& db = population[b];
      if (da.rank != db.rank) return da.rank < db.rank ? da : db;
      if (da.crowding != db.crowding) return da.crowding > db.crowding ? da : db;
      return a <= b ? da : db;
    };

    std::vector<TrajectoryEntry> offspring;
    std::set<std::string> pending;
    std::size_t attempts = 0;
    while (offspring.size() < pop_size && attempts++ < 10 * pop_size) {
      const RankedDesign& p1 = tournament();
      const RankedDesign& p2 = tournament();
      DirectiveConfig c1 = p1.config;
      DirectiveConfig c2 = p2.config;
      bool crossed = false;
      if (rng.bernoulli(params.crossover_prob)) {
        for (const auto& slot : view.slots)
          if (rng.bernoulli(0.5)) {
            std::int64_t v1 = CoordinateView::get(c1, slot);
            std::int64_t v2 = CoordinateView::get(c2, slot);
            CoordinateView::set(c1, slot, v2);
            CoordinateView::set(c2, slot, v1);
            crossed = true;
          }
      }
      for (DirectiveConfig* child : {&c1, &c2}) {
        bool mutated = false;
        for (std::size_t s = 0; s < view.slots.size(); ++s)
          if (rng.bernoulli(params.mutation_prob)) {
            auto domain = view.domain_of(space, s);
            CoordinateView::set(*child, view.slots[s],
                                domain[rng.uniform_index(domain.size())]);
            mutated = true;
          }
        if (offspring.size() >= pop_size) break;
        DirectiveConfig repaired = repair(space, *child);
        std::string hash = canonical_hash(design, repaired);
        if (engine.trajectory.knows(hash) || pending.count(hash)) continue;
        pending.insert(hash);
        TrajectoryEntry entry;
        entry.iteration = gen;
        entry.op = mutated ? OpTag::mutation : OpTag::crossover;
        entry.config = std::move(repaired);
        entry.config_hash = std::move(hash);
        entry.parents = {p1.config_id, p2.config_id};
        entry.note = crossed && !mutated ? "crossover" : "";
        offspring.push_back(std::move(entry));
      }
    }

    if (!engine.evaluate_batch(std::move(offspring)))
      return {engine.final_front(), std::move(engine.trajectory)};
    population = manage_population(engine.valid_population(), pop_size);
  }

  return {engine.final_front(), std::move(engine.trajectory)};
}

std::size_t evals_to_target_adrs(const Trajectory& trajectory,
                                 const std::vector<Objectives>& reference, double target) {
  std::vector<Objectives> valid;
  for (std::size_t k = 0; k < trajectory.entries.size(); ++k) {
    const auto& e = trajectory.entries[k];
    if (e.qor.valid) valid.push_back({static_cast<double>(e.qor.latency), e.qor.util});
    if (valid.empty()) continue;
    if (adrs(valid, reference) <= target) return k + 1;
  }
  return trajectory.entries.size();
}

}  // namespace hlsdse
