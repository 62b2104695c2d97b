#pragma once

#include <string>

#include "hlsdse/design.hpp"

namespace hlsdse {

/// Vitis HLS project settings for the emitted synthesis script.
struct ProjectSettings {
  std::string part = "xczu7ev-ffvc1156-2-e";
  double clock_period_ns = 10.0;
  std::string solution = "solution";
  std::string clock_name = "default";
};

ProjectSettings project_settings_default();

/// Renders the synthesis script: project setup, solution configuration,
/// array-partition directives, pipeline directives, unroll directives,
/// then csynth_design and exit. Directives with off/zero values are
/// omitted; complete partitions carry no -factor flag. Deterministic:
/// identical inputs yield byte-identical text.
std::string emit_tcl(const HlsDesign& design, const DirectiveConfig& config,
                     const ProjectSettings& project = ProjectSettings{});

}  // namespace hlsdse
