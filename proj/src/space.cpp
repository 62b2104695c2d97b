#include "hlsdse/space.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "hlsdse/errors.hpp"

namespace hlsdse {

std::vector<std::int64_t> divisors(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 1; i * i <= n; ++i) {
    if (n % i == 0) {
      out.push_back(i);
      if (i != n / i) out.push_back(n / i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const LoopDomain* DesignSpace::loop(std::string_view name) const {
  for (const auto& [n, d] : loop_domains)
    if (n == name) return &d;
  return nullptr;
}

const ArrayDomain* DesignSpace::array(std::string_view name) const {
  for (const auto& [n, d] : array_domains)
    if (n == name) return &d;
  return nullptr;
}

DesignSpace build_space(const HlsDesign& design) {
  DesignSpace space;
  for (const LoopInfo* loop : loops_preorder(design)) {
    LoopDomain dom;
    dom.pipeline = {0, 1};
    dom.unroll.push_back(0);
    for (auto d : divisors(loop->trip_count)) dom.unroll.push_back(d);
    space.loop_domains.emplace_back(loop->name, std::move(dom));
  }
  for (const auto& array : design.arrays) {
    ArrayDomain dom;
    dom.type = {kPartitionComplete, kPartitionBlock, kPartitionCyclic};
    for (int d = 1; d <= static_cast<int>(array.dims.size()); ++d) dom.dim.push_back(d);
    // Partition factors come from the common divisors of the selectable
    // dimension sizes, so any (dim, factor) combination in the product is
    // hardware-legal.
    std::vector<std::int64_t> common = divisors(array.dims[0]);
    for (std::size_t i = 1; i < array.dims.size(); ++i) {
      auto next = divisors(array.dims[i]);
      std::vector<std::int64_t> merged;
      std::set_intersection(common.begin(), common.end(), next.begin(), next.end(),
                            std::back_inserter(merged));
      common = std::move(merged);
    }
    dom.factor.push_back(0);
    dom.factor.insert(dom.factor.end(), common.begin(), common.end());
    space.array_domains.emplace_back(array.name, std::move(dom));
  }
  space.cardinality = cardinality(space);
  return space;
}

BigUint cardinality(const DesignSpace& space) {
  BigUint total = 1;
  for (const auto& [_, dom] : space.loop_domains)
    total *= BigUint(dom.pipeline.size()) * BigUint(dom.unroll.size());
  for (const auto& [_, dom] : space.array_domains)
    total *= BigUint(dom.type.size()) * BigUint(dom.dim.size()) * BigUint(dom.factor.size());
  return total;
}

namespace {

std::int64_t max_descendant_trip(const LoopInfo& loop) {
  std::int64_t best = 0;
  for (const auto& child : loop.children)
    best = std::max({best, child.trip_count, max_descendant_trip(child)});
  return best;
}

template <typename T>
void keep_only(std::vector<T>& domain, std::initializer_list<T> values) {
  std::vector<T> kept;
  for (auto v : domain)
    if (std::find(values.begin(), values.end(), v) != values.end()) kept.push_back(v);
  domain = std::move(kept);
}

struct StructuralPruner {
  const PruneRuleSet& rules;
  std::map<std::string, LoopDomain*>& domains;

  void visit(const LoopInfo& loop, bool is_root) {
    LoopDomain& dom = *domains.at(loop.name);
    if (!loop.children.empty()) {
      // (a) outer pipelining of deep nests or of nests with large inner
      // trip counts forces full unrolling below; disable it.
      if (subtree_depth(loop) >= rules.outer_pipeline_disable_depth ||
          max_descendant_trip(loop) > rules.large_trip_threshold)
        keep_only(dom.pipeline, {0});
      // (b) outermost loop of a multilayer nest never unrolls.
      if (is_root) keep_only(dom.unroll, {std::int64_t{0}});
      // (c) loops fanning out into several sub-loops never unroll.
      if (loop.children.size() >= 2) keep_only(dom.unroll, {std::int64_t{0}});
      // (d) imperfect loop bodies block child unrolling.
      if (!loop.is_perfect)
        for (const auto& child : loop.children)
          keep_only(domains.at(child.name)->unroll, {std::int64_t{0}});
    }
    // (e) cap aggressive unrolling of large loops.
    if (loop.trip_count > rules.large_trip_threshold) {
      std::vector<std::int64_t> kept;
      for (auto v : dom.unroll)
        if (v <= rules.max_unroll_cap) kept.push_back(v);
      dom.unroll = std::move(kept);
    }
    for (const auto& child : loop.children) visit(child, false);
  }
};

void apply_custom_rule(DesignSpace& space, const PruneRule& rule) {
  auto apply_int64 = [&](std::vector<std::int64_t>& dom, bool keep_zero) {
    std::vector<std::int64_t> next;
    for (auto v : dom) {
      bool listed = std::find(rule.values.begin(), rule.values.end(), v) != rule.values.end();
      bool keep = rule.action == "remove" ? !listed : listed;
      if (keep || (keep_zero && v == 0)) next.push_back(v);
    }
    if (next.empty())
      throw ValidationError("custom rule on '" + rule.site + "." + rule.field +
                            "' would empty the domain");
    dom = std::move(next);
  };
  auto apply_int = [&](std::vector<int>& dom) {
    std::vector<std::int64_t> wide(dom.begin(), dom.end());
    apply_int64(wide, false);
    dom.assign(wide.begin(), wide.end());
  };

  if (rule.action != "remove" && rule.action != "restrict")
    throw ValidationError("custom rule action must be 'remove' or 'restrict', got '" +
                          rule.action + "'");

  for (auto& [name, dom] : space.loop_domains) {
    if (name != rule.site) continue;
    if (rule.field == "pipeline") return apply_int(dom.pipeline);
    if (rule.field == "unroll") return apply_int64(dom.unroll, true);
    throw ValidationError("custom rule: loop '" + name + "' has no field '" + rule.field + "'");
  }
  for (auto& [name, dom] : space.array_domains) {
    if (name != rule.site) continue;
    if (rule.field == "type") return apply_int(dom.type);
    if (rule.field == "dim") return apply_int(dom.dim);
    if (rule.field == "factor") return apply_int64(dom.factor, true);
    throw ValidationError("custom rule: array '" + name + "' has no field '" + rule.field + "'");
  }
  throw ValidationError("custom rule names unknown site '" + rule.site + "'");
}

}  // namespace

DesignSpace prune(const DesignSpace& space, const HlsDesign& design, const PruneRuleSet& rules) {
  DesignSpace out = space;
  std::map<std::string, LoopDomain*> domains;
  for (auto& [name, dom] : out.loop_domains) domains[name] = &dom;

  StructuralPruner pruner{rules, domains};
  for (const auto& root : design.loops) pruner.visit(root, true);

  for (const auto& rule : rules.custom_rules) apply_custom_rule(out, rule);

  out.cardinality = cardinality(out);
  return out;
}

namespace {

template <typename T>
bool in_domain(const std::vector<T>& dom, T v) {
  return std::find(dom.begin(), dom.end(), v) != dom.end();
}

/// Nearest domain value by absolute distance, ties toward the smaller
/// value. Domains are sorted ascending, so scanning in order and using a
/// strict improvement keeps the smaller candidate on ties.
template <typename T>
T nearest(const std::vector<T>& dom, T v) {
  T best = dom.front();
  auto dist = [v](T d) { return d > v ? d - v : v - d; };
  for (T d : dom)
    if (dist(d) < dist(best)) best = d;
  return best;
}

}  // namespace

bool contains(const DesignSpace& space, const DirectiveConfig& config) {
  for (const auto& [name, d] : config.loop_directives) {
    const LoopDomain* dom = space.loop(name);
    if (!dom) return false;
    if (!in_domain(dom->pipeline, d.pipeline)) return false;
    if (!in_domain(dom->unroll, d.unroll)) return false;
  }
  for (const auto& [name, d] : config.array_directives) {
    const ArrayDomain* dom = space.array(name);
    if (!dom) return false;
    if (!in_domain(dom->type, d.type)) return false;
    if (!in_domain(dom->dim, d.dim)) return false;
    if (!in_domain(dom->factor, d.factor)) return false;
    if (d.type == kPartitionComplete && d.factor != 0) return false;
  }
  return true;
}

DirectiveConfig repair(const DesignSpace& space, const DirectiveConfig& config) {
  DirectiveConfig out;
  for (const auto& [name, d] : config.loop_directives) {
    const LoopDomain* dom = space.loop(name);
    if (!dom) continue;  // unknown site: drop (advisor guardrail)
    LoopDirective fixed;
    fixed.pipeline = nearest(dom->pipeline, d.pipeline);
    fixed.unroll = nearest(dom->unroll, d.unroll);
    out.loop_directives[name] = fixed;
  }
  for (const auto& [name, d] : config.array_directives) {
    const ArrayDomain* dom = space.array(name);
    if (!dom) continue;
    ArrayDirective fixed;
    fixed.type = nearest(dom->type, d.type);
    fixed.dim = nearest(dom->dim, d.dim);
    fixed.factor = nearest(dom->factor, d.factor);
    if (fixed.type == kPartitionComplete) fixed.factor = 0;
    out.array_directives[name] = fixed;
  }
  return out;
}

nlohmann::json space_json(const DesignSpace& space) {
  nlohmann::json loops = nlohmann::json::object();
  for (const auto& [name, dom] : space.loop_domains)
    loops[name] = {{"pipeline", dom.pipeline}, {"unroll", dom.unroll}};
  nlohmann::json arrays = nlohmann::json::object();
  for (const auto& [name, dom] : space.array_domains)
    arrays[name] = {{"type", dom.type}, {"dim", dom.dim}, {"factor", dom.factor}};
  return {{"loop_domains", loops},
          {"array_domains", arrays},
          {"cardinality", space.cardinality.str()}};
}

PruneRuleSet rules_from_json(const nlohmann::json& j) {
  PruneRuleSet rules;
  if (!j.is_object()) throw ParseError("rules: expected object");
  rules.large_trip_threshold = j.value("large_trip_threshold", std::int64_t{64});
  rules.max_unroll_cap = j.value("max_unroll_cap", std::int64_t{64});
  rules.outer_pipeline_disable_depth = j.value("outer_pipeline_disable_depth", 3);
  if (rules.large_trip_threshold < 1 || rules.max_unroll_cap < 1 ||
      rules.outer_pipeline_disable_depth < 1)
    throw ValidationError("rules: thresholds must be >= 1");
  if (j.contains("custom_rules")) {
    if (!j["custom_rules"].is_array()) throw ParseError("rules.custom_rules: expected array");
    for (const auto& r : j["custom_rules"]) {
      PruneRule rule;
      if (!r.contains("site") || !r.contains("field") || !r.contains("action"))
        throw ParseError("rules.custom_rules: each rule needs site, field, action");
      rule.site = r["site"].get<std::string>();
      rule.field = r["field"].get<std::string>();
      rule.action = r["action"].get<std::string>();
      if (r.contains("values"))
        for (const auto& v : r["values"]) rule.values.push_back(v.get<std::int64_t>());
      rules.custom_rules.push_back(std::move(rule));
    }
  }
  return rules;
}

nlohmann::json rules_json(const PruneRuleSet& rules) {
  auto customs = nlohmann::json::array();
  for (const auto& r : rules.custom_rules)
    customs.push_back(
        {{"site", r.site}, {"field", r.field}, {"action", r.action}, {"values", r.values}});
  return {{"large_trip_threshold", rules.large_trip_threshold},
          {"max_unroll_cap", rules.max_unroll_cap},
          {"outer_pipeline_disable_depth", rules.outer_pipeline_disable_depth},
          {"custom_rules", customs}};
}

}  // namespace hlsdse
