#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "hlsdse/design.hpp"
#include "hlsdse/rng.hpp"
#include "hlsdse/space.hpp"

#ifndef HLSDSE_FIXTURE_DIR
#define HLSDSE_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef HLSDSE_CLI_PATH
#define HLSDSE_CLI_PATH "hls-dse"
#endif

namespace testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(HLSDSE_FIXTURE_DIR) + "/" + name;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline hlsdse::HlsDesign load_fixture(const std::string& name) {
  return hlsdse::parse_design(read_text(fixture_path(name)));
}

/// Listing-style configuration for vector_mul: pipeline + unroll 2 on the
/// loop, cyclic factor-2 dim-1 partitions on A, B, C.
inline hlsdse::DirectiveConfig vector_mul_config() {
  hlsdse::DirectiveConfig config;
  config.loop_directives["mul"] = {1, 2};
  for (const char* array : {"A", "B", "C"})
    config.array_directives[array] = {hlsdse::kPartitionCyclic, 1, 2};
  return config;
}

/// Uniformly random full configuration drawn from a space.
inline hlsdse::DirectiveConfig random_config(const hlsdse::DesignSpace& space, hlsdse::Rng& rng) {
  hlsdse::DirectiveConfig config;
  for (const auto& [name, dom] : space.loop_domains) {
    hlsdse::LoopDirective d;
    d.pipeline = dom.pipeline[rng.uniform_index(dom.pipeline.size())];
    d.unroll = dom.unroll[rng.uniform_index(dom.unroll.size())];
    config.loop_directives[name] = d;
  }
  for (const auto& [name, dom] : space.array_domains) {
    hlsdse::ArrayDirective d;
    d.type = dom.type[rng.uniform_index(dom.type.size())];
    d.dim = dom.dim[rng.uniform_index(dom.dim.size())];
    d.factor = dom.factor[rng.uniform_index(dom.factor.size())];
    if (d.type == hlsdse::kPartitionComplete) d.factor = 0;
    config.array_directives[name] = d;
  }
  return config;
}

}  // namespace testing
