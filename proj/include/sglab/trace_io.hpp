#pragma once

// Text dump of a PT run, layout version 1:
//
//   sglab-trace v1
//   instance <id>
//   seed <u64>
//   replicas <R>
//   steps <steps>
//   sweeps_per_step <k>
//   trace_stride <s>
//   ladder <T_1> ... <T_NT>
//   min_energy <energy>            (optional)
//   trace <copy> <hex>             one per copy; two hex digits per sample
//   energies <slot> <e_1> ...      one per slot (optional)
//   snapshot <checkpoint> <step> <replica> <slot> <copy> <energy> <+-...>
//   end
//
// Lines starting with '#' are comments. Reals are written with 17
// significant digits so a dump round-trips exactly.

#include <string>
#include <string_view>

#include "sglab/engine.hpp"

namespace sglab {

std::string serialize_trace_dump(const engine::RunOutput& run);
/// Restores everything except final_state and min_config. Throws ParseError.
engine::RunOutput parse_trace_dump(std::string_view text);

void write_trace_dump(const std::string& path, const engine::RunOutput& run);
engine::RunOutput read_trace_dump(const std::string& path);

}  // namespace sglab
