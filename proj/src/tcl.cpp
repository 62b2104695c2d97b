#include "hlsdse/tcl.hpp"

#include <cstdio>
#include <sstream>

#include "hlsdse/errors.hpp"

namespace hlsdse {

ProjectSettings project_settings_default() { return ProjectSettings{}; }

namespace {

std::string format_period(double ns) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", ns);
  return buf;
}

const char* partition_type_name(int type) {
  switch (type) {
    case kPartitionComplete: return "complete";
    case kPartitionBlock: return "block";
    case kPartitionCyclic: return "cyclic";
    default: throw ValidationError("unknown partition type code " + std::to_string(type));
  }
}

}  // namespace

std::string emit_tcl(const HlsDesign& design, const DirectiveConfig& config,
                     const ProjectSettings& project) {
  FeatureVector fv = encode_feature_vector(design, config);

  std::ostringstream partitions;
  for (const auto& r : fv.arrays) {
    // A block/cyclic partition with factor <= 1 is a no-op and is omitted;
    // complete partitioning ignores the factor entirely.
    if (r.type == kPartitionComplete) {
      partitions << "set_directive_array_partition -type complete -dim " << r.dim << " \""
                 << design.kernel_name << "\" " << r.name << "\n";
    } else if (r.factor >= 2) {
      partitions << "set_directive_array_partition -type " << partition_type_name(r.type)
                 << " -factor " << r.factor << " -dim " << r.dim << " \"" << design.kernel_name
                 << "\" " << r.name << "\n";
    }
  }

  std::ostringstream pipelines;
  std::ostringstream unrolls;
  for (const auto& r : fv.loops) {
    if (r.pipeline)
      pipelines << "set_directive_pipeline \"" << design.kernel_name << '/' << r.name << "\"\n";
    if (r.unroll >= 2)
      unrolls << "set_directive_unroll -factor " << r.unroll << " \"" << design.kernel_name << '/'
              << r.name << "\"\n";
  }

  std::ostringstream out;
  out << "# Project Setup\n"
      << "open_project " << design.kernel_name << "\n"
      << "add_files " << design.source_file() << "\n"
      << "set_top " << design.kernel_name << "\n\n"
      << "# Solution Configuration\n"
      << "open_solution " << project.solution << "\n"
      << "set_part {" << project.part << "}\n"
      << "create_clock -period " << format_period(project.clock_period_ns) << " -name "
      << project.clock_name << "\n";
  if (auto text = partitions.str(); !text.empty())
    out << "\n# Array Partition Directives\n" << text;
  if (auto text = pipelines.str(); !text.empty())
    out << "\n# Loop Pipeline Directives\n" << text;
  if (auto text = unrolls.str(); !text.empty())
    out << "\n# Loop Unroll Directives\n" << text;
  out << "\n# HLS Synthesis\ncsynth_design\nexit\n";
  return out.str();
}

}  // namespace hlsdse
