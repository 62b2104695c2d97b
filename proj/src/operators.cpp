#include "hlsdse/operators.hpp"

#include <algorithm>

#include "hlsdse/errors.hpp"

namespace hlsdse {

const char* bottleneck_name(Bottleneck b) {
  return b == Bottleneck::memory_bound ? "memory_bound" : "compute_bound";
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t stored_unroll(const DirectiveConfig& config, const std::string& loop) {
  auto it = config.loop_directives.find(loop);
  return it == config.loop_directives.end() ? 0 : it->second.unroll;
}

/// Iteration-count estimate without introspection: product of per-level
/// ceil(trip/unroll) summed over leaves.
std::int64_t estimated_iterations(const HlsDesign& design, const DirectiveConfig& config) {
  struct Walker {
    const DirectiveConfig& config;
    std::int64_t total = 0;
    void walk(const LoopInfo& loop, std::int64_t outer) {
      std::int64_t u = std::max<std::int64_t>(1, stored_unroll(config, loop.name));
      std::int64_t iters = outer * ceil_div(loop.trip_count, u);
      if (loop.children.empty()) {
        total += iters;
        return;
      }
      for (const auto& child : loop.children) walk(child, iters);
    }
  } walker{config};
  for (const auto& root : design.loops) walker.walk(root, 1);
  return std::max<std::int64_t>(1, walker.total);
}

struct LeafPath {
  const LoopInfo* leaf = nullptr;
  std::vector<const LoopInfo*> path;  // root..leaf
};

std::vector<LeafPath> leaf_paths(const HlsDesign& design) {
  std::vector<LeafPath> out;
  struct Walker {
    std::vector<LeafPath>& out;
    std::vector<const LoopInfo*> stack;
    void walk(const LoopInfo& loop) {
      stack.push_back(&loop);
      if (loop.children.empty()) out.push_back({&loop, stack});
      for (const auto& child : loop.children) walk(child);
      stack.pop_back();
    }
  } walker{out, {}};
  for (const auto& root : design.loops) walker.walk(root);
  return out;
}

}  // namespace

Bottleneck classify_bottleneck(const HlsDesign& design, const DirectiveConfig& config,
                               const QoR& qor, const std::optional<Introspection>& intro) {
  if (!qor.valid) throw ValidationError("classify_bottleneck: QoR is invalid");
  if (intro) {
    auto contention = mock_leaf_contention(design, config, intro->ports_per_partition);
    for (const auto& [_, ii] : contention)
      if (ii > 1) return Bottleneck::memory_bound;
    return Bottleneck::compute_bound;
  }
  std::int64_t iters = estimated_iterations(design, config);
  double per_iteration = static_cast<double>(qor.latency) / static_cast<double>(iters);
  if (qor.bram > qor.dsp && per_iteration > static_cast<double>(Introspection{}.pipeline_depth))
    return Bottleneck::memory_bound;
  return Bottleneck::compute_bound;
}

std::string critical_loop(const HlsDesign& design, const DirectiveConfig& config,
                          const std::optional<Introspection>& intro) {
  auto paths = leaf_paths(design);
  if (paths.empty()) throw ValidationError("critical_loop: design has no loops");
  if (intro) {
    MockModelParams params;
    params.ports_per_partition = intro->ports_per_partition;
    params.pipeline_depth = intro->pipeline_depth;
    auto contribution = mock_leaf_latency_contribution(design, config, params);
    std::string best;
    std::int64_t best_latency = -1;
    for (const auto& lp : paths) {  // pre-order; first wins ties
      auto it = contribution.find(lp.leaf->name);
      std::int64_t latency = it == contribution.end() ? 0 : it->second;
      if (latency > best_latency) {
        best_latency = latency;
        best = lp.leaf->name;
      }
    }
    return best;
  }
  const LeafPath* best = &paths.front();
  for (const auto& lp : paths) {
    auto key = [](const LeafPath& p) {
      return std::pair<std::size_t, std::int64_t>(p.path.size(), p.leaf->trip_count);
    };
    if (key(lp) > key(*best)) best = &lp;
  }
  return best->leaf->name;
}

std::vector<std::int64_t> power_of_two_members(const std::vector<std::int64_t>& domain) {
  std::vector<std::int64_t> out;
  for (auto v : domain)
    if (v > 0 && (v & (v - 1)) == 0) out.push_back(v);
  return out;
}

std::int64_t domain_value_at_least(const std::vector<std::int64_t>& domain, std::int64_t target) {
  for (auto v : domain)
    if (v >= target) return v;
  return domain.back();
}

namespace {

/// Raises partition factors of every array touched by an unrolled loop up
/// to that loop's unroll. Returns true if anything moved.
bool raise_partition_factors(const HlsDesign& design, const DesignSpace& space,
                             DirectiveConfig& config) {
  bool changed = false;
  for (const LoopInfo* loop : loops_preorder(design)) {
    std::int64_t u = std::max<std::int64_t>(1, stored_unroll(config, loop->name));
    if (u <= 1) continue;
    for (const auto& [array, dim] : loop->accessed_arrays) {
      const ArrayDomain* dom = space.array(array);
      if (!dom) continue;
      ArrayDirective d;
      if (auto it = config.array_directives.find(array); it != config.array_directives.end())
        d = it->second;
      if (d.type == kPartitionComplete) continue;  // already at full bandwidth
      std::int64_t target = domain_value_at_least(dom->factor, u);
      if (target <= std::max<std::int64_t>(1, d.factor)) continue;
      if (d.factor <= 1) {
        // enabling a fresh partition: pick cyclic on the accessed dimension
        if (std::find(dom->type.begin(), dom->type.end(), kPartitionCyclic) != dom->type.end())
          d.type = kPartitionCyclic;
        if (std::find(dom->dim.begin(), dom->dim.end(), dim) != dom->dim.end()) d.dim = dim;
      }
      d.factor = target;
      config.array_directives[array] = d;
      changed = true;
    }
  }
  return changed;
}

/// Moves pipelining one level outward along the critical path; pipelines
/// the critical leaf when nothing is pipelined yet.
bool push_pipeline_outward(const HlsDesign& design, const DesignSpace& space,
                           DirectiveConfig& config, const std::string& critical) {
  auto pipelined = [&](const std::string& name) {
    auto it = config.loop_directives.find(name);
    return it != config.loop_directives.end() && it->second.pipeline == 1;
  };
  auto can_pipeline = [&](const std::string& name) {
    const LoopDomain* dom = space.loop(name);
    return dom && std::find(dom->pipeline.begin(), dom->pipeline.end(), 1) != dom->pipeline.end();
  };

  // path root..leaf for the critical leaf
  std::vector<std::string> path;
  for (const auto& lp_name : std::vector<std::string>{critical}) {
    std::string cursor = lp_name;
    while (!cursor.empty()) {
      path.insert(path.begin(), cursor);
      const LoopInfo* parent = parent_loop(design, cursor);
      cursor = parent ? parent->name : "";
    }
  }

  // innermost pipelined level on the path
  int innermost = -1;
  for (int i = static_cast<int>(path.size()) - 1; i >= 0; --i)
    if (pipelined(path[static_cast<std::size_t>(i)])) {
      innermost = i;
      break;
    }
  if (innermost < 0) {
    const std::string& leaf = path.back();
    if (!can_pipeline(leaf)) return false;
    config.loop_directives[leaf].pipeline = 1;
    return true;
  }
  if (innermost == 0) return false;  // already at the outermost level
  const std::string& outer = path[static_cast<std::size_t>(innermost - 1)];
  if (pipelined(outer) || !can_pipeline(outer)) return false;
  config.loop_directives[outer].pipeline = 1;
  return true;
}

}  // namespace

std::optional<DirectiveConfig> convergent_child(const HlsDesign& design, const DesignSpace& space,
                                                const ParentState& parent,
                                                const std::optional<Introspection>& intro) {
  DirectiveConfig child = parent.config;
  std::string critical = critical_loop(design, parent.config, intro);

  if (parent.bottleneck == Bottleneck::compute_bound) {
    const LoopDomain* dom = space.loop(critical);
    if (!dom) return std::nullopt;
    std::int64_t current = std::max<std::int64_t>(1, stored_unroll(child, critical));
    std::int64_t next = -1;
    for (auto v : dom->unroll)
      if (v > current) {
        next = v;
        break;
      }
    if (next < 0) return std::nullopt;  // already at the largest legal unroll
    child.loop_directives[critical].unroll = next;
    return repair(space, child);
  }

  bool changed = raise_partition_factors(design, space, child);
  changed |= push_pipeline_outward(design, space, child, critical);
  if (!changed) return std::nullopt;
  return repair(space, child);
}

int coordinate_distance(const HlsDesign& design, const DirectiveConfig& a,
                        const DirectiveConfig& b) {
  FeatureVector fa = encode_feature_vector(design, canonical_config(design, a));
  FeatureVector fb = encode_feature_vector(design, canonical_config(design, b));
  int distance = 0;
  for (std::size_t i = 0; i < fa.loops.size(); ++i) {
    if (fa.loops[i].pipeline != fb.loops[i].pipeline) ++distance;
    if (fa.loops[i].unroll != fb.loops[i].unroll) ++distance;
  }
  for (std::size_t i = 0; i < fa.arrays.size(); ++i) {
    if (fa.arrays[i].type != fb.arrays[i].type) ++distance;
    if (fa.arrays[i].dim != fb.arrays[i].dim) ++distance;
    if (fa.arrays[i].factor != fb.arrays[i].factor) ++distance;
  }
  return distance;
}

std::vector<DirectiveConfig> divergent_candidates(
    const HlsDesign& design, const DesignSpace& space, const std::vector<ParentState>& parents,
    const std::set<std::string>& known_hashes, std::size_t count, Rng& rng,
    const DivergentRules& rules) {
  std::vector<DirectiveConfig> out;
  std::set<std::string> generated;
  auto paths = leaf_paths(design);

  std::size_t attempts = 0;
  const std::size_t max_attempts = 20 * std::max<std::size_t>(1, count);
  while (out.size() < count && attempts++ < max_attempts) {
    DirectiveConfig candidate;
    bool feasible = true;

    for (const auto& lp : paths) {
      // innermost pipelining, power-of-two unrolls at the leaf
      const LoopDomain* dom = space.loop(lp.leaf->name);
      if (!dom) continue;
      LoopDirective d;
      if (std::find(dom->pipeline.begin(), dom->pipeline.end(), 1) != dom->pipeline.end())
        d.pipeline = 1;
      auto pow2 = power_of_two_members(dom->unroll);
      if (!pow2.empty()) d.unroll = pow2[rng.uniform_index(pow2.size())];
      candidate.loop_directives[lp.leaf->name] = d;

      // outer levels: no pipelining; unrolling only below the trip threshold
      for (std::size_t level = 0; level + 1 < lp.path.size(); ++level) {
        const LoopInfo* outer = lp.path[level];
        if (candidate.loop_directives.count(outer->name)) continue;
        const LoopDomain* odom = space.loop(outer->name);
        if (!odom) continue;
        LoopDirective od;
        od.pipeline = 0;
        if (outer->trip_count <= rules.trip_threshold) {
          auto opow2 = power_of_two_members(odom->unroll);
          if (!opow2.empty()) od.unroll = opow2[rng.uniform_index(opow2.size())];
        }
        candidate.loop_directives[outer->name] = od;
      }
    }

    // partitions matched to the unroll of the accessing loop
    for (const LoopInfo* loop : loops_preorder(design)) {
      std::int64_t u = std::max<std::int64_t>(1, stored_unroll(candidate, loop->name));
      if (u <= 1) continue;
      for (const auto& [array, dim] : loop->accessed_arrays) {
        const ArrayDomain* dom = space.array(array);
        if (!dom) continue;
        const ArrayInfo* info = find_array(design, array);
        ArrayDirective d;
        if (auto it = candidate.array_directives.find(array);
            it != candidate.array_directives.end())
          d = it->second;
        d.factor = std::max(d.factor, domain_value_at_least(dom->factor, u));
        std::vector<int> types;
        for (int t : dom->type)
          if (t == kPartitionCyclic || (info->dims.size() > 1 && t == kPartitionBlock))
            types.push_back(t);
        if (!types.empty()) d.type = types[rng.uniform_index(types.size())];
        if (std::find(dom->dim.begin(), dom->dim.end(), dim) != dom->dim.end()) d.dim = dim;
        candidate.array_directives[array] = d;
      }
    }

    candidate = repair(space, candidate);

    // II lower bound: reject candidates whose unroll outruns the matched
    // partition bandwidth too far.
    for (const LoopInfo* loop : loops_preorder(design)) {
      std::int64_t u = std::max<std::int64_t>(1, stored_unroll(candidate, loop->name));
      for (const auto& [array, dim] : loop->accessed_arrays) {
        ArrayDirective d;
        if (auto it = candidate.array_directives.find(array);
            it != candidate.array_directives.end())
          d = it->second;
        std::int64_t eff = d.type == kPartitionComplete
                               ? find_array(design, array)->dims[static_cast<std::size_t>(d.dim - 1)]
                               : std::max<std::int64_t>(1, d.factor);
        if (ceil_div(u, eff * rules.ports_per_partition) > rules.max_estimated_ii)
          feasible = false;
      }
    }
    if (!feasible) continue;

    std::string hash = canonical_hash(design, candidate);
    if (known_hashes.count(hash) || generated.count(hash)) continue;
    bool novel = true;
    for (const auto& parent : parents)
      if (coordinate_distance(design, candidate, parent.config) < 2) novel = false;
    if (!novel) continue;

    generated.insert(hash);
    out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace hlsdse
