#pragma once

#include <array>

#include "squidfit/presets.hpp"

// The eight reference parameter sets, in preset order A..H.
inline const std::vector<squidfit::QubitPreset>& reference_qubits() {
  return squidfit::qubit_presets();
}

inline squidfit::QubitParams reference_params(char letter,
                                              double phi_ext = 0.0) {
  const char name[2] = {letter, '\0'};
  const auto* preset = squidfit::find_preset(name);
  if (!preset) throw std::runtime_error("unknown reference qubit");
  squidfit::QubitParams p = preset->params;
  p.phi_ext = phi_ext;
  return p;
}
