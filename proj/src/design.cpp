#include "hlsdse/design.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "hlsdse/errors.hpp"

namespace hlsdse {

namespace {

void collect_loops(const std::vector<LoopInfo>& loops, std::vector<const LoopInfo*>& out) {
  for (const auto& loop : loops) {
    out.push_back(&loop);
    collect_loops(loop.children, out);
  }
}

void validate_loop(const LoopInfo& loop, const HlsDesign& design, std::set<std::string>& seen) {
  if (loop.name.empty()) throw ValidationError("loop with empty name");
  if (!seen.insert(loop.name).second)
    throw ValidationError("duplicate loop name '" + loop.name + "'");
  if (loop.trip_count < 1)
    throw ValidationError("loop '" + loop.name + "': trip_count must be >= 1");
  if (loop.is_perfect && loop.children.size() > 1)
    throw ValidationError("loop '" + loop.name +
                          "': a perfect loop with children must have exactly one child");
  for (const auto& [array, dim] : loop.accessed_arrays) {
    const ArrayInfo* info = find_array(design, array);
    if (!info)
      throw ValidationError("loop '" + loop.name + "': accessed array '" + array + "' not declared");
    if (dim < 1 || static_cast<std::size_t>(dim) > info->dims.size())
      throw ValidationError("loop '" + loop.name + "': dimension " + std::to_string(dim) +
                            " out of range for array '" + array + "'");
  }
  for (const auto& child : loop.children) validate_loop(child, design, seen);
}

}  // namespace

void validate(const HlsDesign& design) {
  if (design.kernel_name.empty()) throw ValidationError("kernel: must be non-empty");
  if (design.loops.empty()) throw ValidationError("loops: must contain at least one loop");
  std::set<std::string> array_names;
  for (const auto& array : design.arrays) {
    if (array.name.empty()) throw ValidationError("array with empty name");
    if (!array_names.insert(array.name).second)
      throw ValidationError("duplicate array name '" + array.name + "'");
    if (array.dims.empty())
      throw ValidationError("array '" + array.name + "': dims must be non-empty");
    for (auto d : array.dims)
      if (d < 1)
        throw ValidationError("array '" + array.name + "': dimension sizes must be >= 1");
  }
  std::set<std::string> loop_names;
  for (const auto& loop : design.loops) validate_loop(loop, design, loop_names);
}

namespace {

LoopInfo loop_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected object");
  LoopInfo loop;
  if (!j.contains("name") || !j["name"].is_string())
    throw ParseError(path + ".name: required string");
  loop.name = j["name"].get<std::string>();
  if (!j.contains("trip_count") || !j["trip_count"].is_number_integer())
    throw ParseError(path + ".trip_count: required integer");
  loop.trip_count = j["trip_count"].get<std::int64_t>();
  loop.is_perfect = j.value("is_perfect", false);
  if (j.contains("accessed_arrays")) {
    if (!j["accessed_arrays"].is_array())
      throw ParseError(path + ".accessed_arrays: expected array of [array, dim] pairs");
    for (const auto& pair : j["accessed_arrays"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_number_integer())
        throw ParseError(path + ".accessed_arrays: expected [array, dim] pairs");
      loop.accessed_arrays.emplace_back(pair[0].get<std::string>(), pair[1].get<int>());
    }
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) throw ParseError(path + ".children: expected array");
    int idx = 0;
    for (const auto& child : j["children"])
      loop.children.push_back(loop_from_json(child, path + ".children[" + std::to_string(idx++) + "]"));
  }
  return loop;
}

nlohmann::json loop_to_json(const LoopInfo& loop) {
  nlohmann::json j;
  j["name"] = loop.name;
  j["trip_count"] = loop.trip_count;
  j["is_perfect"] = loop.is_perfect;
  auto pairs = nlohmann::json::array();
  for (const auto& [array, dim] : loop.accessed_arrays)
    pairs.push_back(nlohmann::json::array({array, dim}));
  j["accessed_arrays"] = pairs;
  auto children = nlohmann::json::array();
  for (const auto& child : loop.children) children.push_back(loop_to_json(child));
  j["children"] = children;
  return j;
}

}  // namespace

HlsDesign parse_design(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("design document is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("design: expected top-level object");
  HlsDesign design;
  if (!j.contains("kernel") || !j["kernel"].is_string())
    throw ParseError("kernel: required string");
  design.kernel_name = j["kernel"].get<std::string>();
  if (!j.contains("loops") || !j["loops"].is_array())
    throw ParseError("loops: required array");
  int idx = 0;
  for (const auto& loop : j["loops"])
    design.loops.push_back(loop_from_json(loop, "loops[" + std::to_string(idx++) + "]"));
  if (j.contains("arrays")) {
    if (!j["arrays"].is_array()) throw ParseError("arrays: expected array");
    idx = 0;
    for (const auto& a : j["arrays"]) {
      std::string path = "arrays[" + std::to_string(idx++) + "]";
      if (!a.is_object() || !a.contains("name") || !a["name"].is_string())
        throw ParseError(path + ".name: required string");
      if (!a.contains("dims") || !a["dims"].is_array())
        throw ParseError(path + ".dims: required array of sizes");
      ArrayInfo info;
      info.name = a["name"].get<std::string>();
      for (const auto& d : a["dims"]) {
        if (!d.is_number_integer()) throw ParseError(path + ".dims: expected integers");
        info.dims.push_back(d.get<std::int64_t>());
      }
      design.arrays.push_back(std::move(info));
    }
  }
  if (j.contains("source")) {
    if (!j["source"].is_string()) throw ParseError("source: expected string");
    design.source_path = j["source"].get<std::string>();
  }
  validate(design);
  return design;
}

std::string serialize_design(const HlsDesign& design) {
  nlohmann::json j;
  j["kernel"] = design.kernel_name;
  auto loops = nlohmann::json::array();
  for (const auto& loop : design.loops) loops.push_back(loop_to_json(loop));
  j["loops"] = loops;
  auto arrays = nlohmann::json::array();
  for (const auto& a : design.arrays) arrays.push_back({{"name", a.name}, {"dims", a.dims}});
  j["arrays"] = arrays;
  if (!design.source_path.empty()) j["source"] = design.source_path;
  return j.dump(2);
}

bool operator==(const LoopInfo& a, const LoopInfo& b) {
  return a.name == b.name && a.trip_count == b.trip_count && a.is_perfect == b.is_perfect &&
         a.accessed_arrays == b.accessed_arrays && a.children == b.children;
}

bool operator==(const ArrayInfo& a, const ArrayInfo& b) {
  return a.name == b.name && a.dims == b.dims;
}

bool operator==(const HlsDesign& a, const HlsDesign& b) {
  return a.kernel_name == b.kernel_name && a.loops == b.loops && a.arrays == b.arrays &&
         a.source_path == b.source_path;
}

std::vector<const LoopInfo*> loops_preorder(const HlsDesign& design) {
  std::vector<const LoopInfo*> out;
  collect_loops(design.loops, out);
  return out;
}

const LoopInfo* find_loop(const HlsDesign& design, std::string_view name) {
  for (const LoopInfo* loop : loops_preorder(design))
    if (loop->name == name) return loop;
  return nullptr;
}

const ArrayInfo* find_array(const HlsDesign& design, std::string_view name) {
  for (const auto& array : design.arrays)
    if (array.name == name) return &array;
  return nullptr;
}

namespace {
const LoopInfo* parent_of(const LoopInfo& node, std::string_view name) {
  for (const auto& child : node.children) {
    if (child.name == name) return &node;
    if (const LoopInfo* p = parent_of(child, name)) return p;
  }
  return nullptr;
}
}  // namespace

const LoopInfo* parent_loop(const HlsDesign& design, std::string_view name) {
  for (const auto& root : design.loops)
    if (const LoopInfo* p = parent_of(root, name)) return p;
  return nullptr;
}

int subtree_depth(const LoopInfo& loop) {
  int deepest = 0;
  for (const auto& child : loop.children) deepest = std::max(deepest, subtree_depth(child));
  return 1 + deepest;
}

FeatureVector encode_feature_vector(const HlsDesign& design, const DirectiveConfig& config) {
  for (const auto& [name, _] : config.loop_directives)
    if (!find_loop(design, name))
      throw ValidationError("config names unknown loop '" + name + "'");
  for (const auto& [name, _] : config.array_directives)
    if (!find_array(design, name))
      throw ValidationError("config names unknown array '" + name + "'");

  FeatureVector fv;
  for (const LoopInfo* loop : loops_preorder(design)) {
    LoopRecord rec;
    rec.name = loop->name;
    if (auto it = config.loop_directives.find(loop->name); it != config.loop_directives.end()) {
      rec.pipeline = it->second.pipeline;
      rec.unroll = it->second.unroll;
    }
    fv.loops.push_back(std::move(rec));
  }
  for (const auto& array : design.arrays) {
    ArrayRecord rec;
    rec.name = array.name;
    if (auto it = config.array_directives.find(array.name); it != config.array_directives.end()) {
      rec.type = it->second.type;
      rec.dim = it->second.dim;
      rec.factor = it->second.factor;
    }
    fv.arrays.push_back(std::move(rec));
  }
  return fv;
}

nlohmann::json feature_vector_json(const FeatureVector& fv) {
  auto out = nlohmann::json::array();
  for (const auto& r : fv.loops)
    out.push_back({{"name", r.name}, {"pipeline", r.pipeline}, {"unroll", r.unroll}});
  for (const auto& r : fv.arrays)
    out.push_back({{"name", r.name}, {"type", r.type}, {"dim", r.dim}, {"factor", r.factor}});
  return out;
}

DirectiveConfig config_from_records(const HlsDesign& design, const nlohmann::json& records,
                                    bool lenient) {
  if (!records.is_array()) throw ParseError("config: expected array of feature records");
  DirectiveConfig config;
  for (const auto& rec : records) {
    if (!rec.is_object() || !rec.contains("name") || !rec["name"].is_string())
      throw ParseError("config record: required string field 'name'");
    std::string name = rec["name"].get<std::string>();
    bool is_loop = rec.contains("pipeline") || rec.contains("unroll");
    bool is_array = rec.contains("type") || rec.contains("factor") || rec.contains("dim");
    if (is_loop == is_array)
      throw ParseError("config record '" + name +
                       "': expected loop fields (pipeline/unroll) or array fields (type/dim/factor)");
    if (is_loop) {
      if (!find_loop(design, name)) {
        if (lenient) continue;
        throw ValidationError("config record names unknown loop '" + name + "'");
      }
      LoopDirective d;
      d.pipeline = rec.value("pipeline", 0);
      d.unroll = rec.value("unroll", std::int64_t{0});
      config.loop_directives[name] = d;
    } else {
      if (!find_array(design, name)) {
        if (lenient) continue;
        throw ValidationError("config record names unknown array '" + name + "'");
      }
      ArrayDirective d;
      d.type = rec.value("type", static_cast<int>(kPartitionCyclic));
      d.dim = rec.value("dim", 1);
      d.factor = rec.value("factor", std::int64_t{0});
      config.array_directives[name] = d;
    }
  }
  return config;
}

DirectiveConfig canonical_config(const HlsDesign& design, const DirectiveConfig& config) {
  FeatureVector fv = encode_feature_vector(design, config);
  DirectiveConfig out;
  for (const auto& r : fv.loops) {
    LoopDirective d;
    d.pipeline = r.pipeline ? 1 : 0;
    d.unroll = r.unroll <= 1 ? 0 : r.unroll;
    out.loop_directives[r.name] = d;
  }
  for (const auto& r : fv.arrays) {
    ArrayDirective d;
    if (r.type == kPartitionComplete) {
      d.type = kPartitionComplete;
      d.dim = r.dim;
      d.factor = 0;
    } else if (r.factor <= 1) {
      d = ArrayDirective{};  // disabled partition collapses to the default
    } else {
      d.type = r.type;
      d.dim = r.dim;
      d.factor = r.factor;
    }
    out.array_directives[r.name] = d;
  }
  return out;
}

std::string canonical_hash(const HlsDesign& design, const DirectiveConfig& config) {
  FeatureVector fv = encode_feature_vector(design, canonical_config(design, config));
  std::ostringstream key;
  for (const auto& r : fv.loops)
    key << "L|" << r.name << '|' << r.pipeline << '|' << r.unroll << ';';
  for (const auto& r : fv.arrays)
    key << "A|" << r.name << '|' << r.type << '|' << r.dim << '|' << r.factor << ';';
  const std::string s = key.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i) {
    hex[i] = digits[h & 0xf];
    h >>= 4;
  }
  return hex;
}

}  // namespace hlsdse
