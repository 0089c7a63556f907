#pragma once

#include <ostream>

#include "core/runconfig.hpp"

namespace sign {

// Command bodies behind the CLI (and the C API). Each throws sign::Error on
// failure and prints its human-readable summary/timing lines to `out`.
void cmd_precompute(const RunConfig& cfg, std::ostream& out);
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_infer(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_bench(const RunConfig& cfg, std::ostream& out);
void cmd_gen_sbm(const RunConfig& cfg, std::ostream& out);
void cmd_analyze_triangles(const RunConfig& cfg, std::ostream& out);

} // namespace sign
