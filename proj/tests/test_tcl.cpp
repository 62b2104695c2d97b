#include <doctest.h>

#include "hlsdse/tcl.hpp"
#include "helpers.hpp"

using namespace hlsdse;

namespace {
const char* kVectorMulGolden =
    "# Project Setup\n"
    "open_project vector_mul\n"
    "add_files vector_mul.cpp\n"
    "set_top vector_mul\n"
    "\n"
    "# Solution Configuration\n"
    "open_solution solution\n"
    "set_part {xczu7ev-ffvc1156-2-e}\n"
    "create_clock -period 10 -name default\n"
    "\n"
    "# Array Partition Directives\n"
    "set_directive_array_partition -type cyclic -factor 2 -dim 1 \"vector_mul\" A\n"
    "set_directive_array_partition -type cyclic -factor 2 -dim 1 \"vector_mul\" B\n"
    "set_directive_array_partition -type cyclic -factor 2 -dim 1 \"vector_mul\" C\n"
    "\n"
    "# Loop Pipeline Directives\n"
    "set_directive_pipeline \"vector_mul/mul\"\n"
    "\n"
    "# Loop Unroll Directives\n"
    "set_directive_unroll -factor 2 \"vector_mul/mul\"\n"
    "\n"
    "# HLS Synthesis\n"
    "csynth_design\n"
    "exit\n";
}  // namespace

TEST_SUITE("tcl") {

TEST_CASE("vector_mul script matches the golden text") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  CHECK(emit_tcl(design, testing::vector_mul_config()) == kVectorMulGolden);
}

TEST_CASE("empty config emits only setup and synthesis") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  std::string script = emit_tcl(design, DirectiveConfig{});
  CHECK(script.find("set_directive") == std::string::npos);
  CHECK(script.find("open_project vector_mul") != std::string::npos);
  CHECK(script.find("csynth_design\nexit\n") != std::string::npos);
}

TEST_CASE("complete partitions carry no factor flag") {
  HlsDesign design = testing::load_fixture("gemm3.json");
  DirectiveConfig config;
  config.array_directives["A"] = {kPartitionComplete, 2, 0};
  std::string script = emit_tcl(design, config);
  CHECK(script.find("set_directive_array_partition -type complete -dim 2 \"gemm3\" A") !=
        std::string::npos);
  CHECK(script.find("-factor") == std::string::npos);
}

TEST_CASE("off and alias values contribute no directive lines") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  DirectiveConfig config;
  config.loop_directives["mul"] = {0, 1};                     // unroll 1 == off
  config.array_directives["A"] = {kPartitionCyclic, 1, 1};    // factor 1 == off
  CHECK(emit_tcl(design, config).find("set_directive") == std::string::npos);
}

TEST_CASE("emission is deterministic") {
  HlsDesign design = testing::load_fixture("gemm3.json");
  DirectiveConfig config;
  config.loop_directives["k"] = {1, 8};
  config.array_directives["B"] = {kPartitionBlock, 1, 4};
  CHECK(emit_tcl(design, config) == emit_tcl(design, config));
}

TEST_CASE("project settings default and overrides") {
  ProjectSettings settings = project_settings_default();
  CHECK(settings.part == "xczu7ev-ffvc1156-2-e");
  CHECK(settings.clock_period_ns == 10.0);
  CHECK(settings.solution == "solution");

  HlsDesign design = testing::load_fixture("vector_mul.json");
  settings.clock_period_ns = 5;
  settings.part = "xc7z020clg400-1";
  std::string script = emit_tcl(design, DirectiveConfig{}, settings);
  CHECK(script.find("create_clock -period 5 -name default") != std::string::npos);
  CHECK(script.find("set_part {xc7z020clg400-1}") != std::string::npos);
}

TEST_CASE("source path overrides the derived file name") {
  HlsDesign design = testing::load_fixture("vector_mul.json");
  design.source_path = "src/kernels/vmul.cpp";
  CHECK(emit_tcl(design, DirectiveConfig{}).find("add_files src/kernels/vmul.cpp") !=
        std::string::npos);
}

}  // TEST_SUITE
