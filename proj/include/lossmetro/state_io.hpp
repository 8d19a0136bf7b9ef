#pragma once

// State files.
//
// JSON:   {"format": "lossmetro-state", "version": 1,
//          "layout": [{"cutoff": c, "role": "ancilla|signal|environment",
//                      "element": k}, ...],
//          "truncated_tail": t, "amplitudes": [[re, im], ...]}
//
// Binary (little-endian):
//   char[4]  magic "LMST"
//   u32      version (1)
//   u32      mode count
//   per mode: i32 cutoff, i32 role (0 ancilla, 1 signal, 2 environment), i32 element
//   f64      truncated tail
//   u64      amplitude count
//   per amplitude: f64 real, f64 imag
//
// Amplitudes follow the canonical basis order of the layout. The binary
// format round-trips bit for bit; JSON round-trips exactly as well since
// doubles are printed with 17 significant digits.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "lossmetro/fock.hpp"

namespace lossmetro {

nlohmann::json layout_to_json(const ModeLayout& layout);
ModeLayout layout_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const PureState& psi);
PureState state_from_json(const nlohmann::json& j);

void write_state_binary(std::ostream& out, const PureState& psi);
PureState read_state_binary(std::istream& in);

void save_state(const std::string& path, const PureState& psi, bool binary);
/// Detects the format from the first bytes of the file.
PureState load_state(const std::string& path);

}  // namespace lossmetro
