#pragma once

#include <string>

#include "squidfit/qubit.hpp"

// Regime classification of an rf-SQUID qubit on the two-axis map spanned by
// the tunneling ratio E_J/E_C and the characteristic impedance Z_C relative
// to the resistance quantum R_Q = h/(2e)^2.
//
// With E_C = e^2/2C and E_L = (Phi0/2pi)^2/L the impedance Z_C = sqrt(L/C)
// works out to
//
//   Z_C = (hbar / e^2) sqrt(E_C / (2 E_L)) = (R_Q / pi) sqrt(2 E_C / E_L),
//
// i.e. Z_C / R_Q = phi_zpf^2 / pi.

namespace squidfit {

enum class QubitRegime { flux, fluxonium, quasi_charge, weakly_anharmonic };

std::string to_string(QubitRegime r);

struct RegimeReport {
  double ratio_ej_ec = 0.0;
  double ratio_el_ec = 0.0;
  double z_c_ohm = 0.0;
  double z_c_over_rq = 0.0;
  double phase_zpf = 0.0;
  QubitRegime label = QubitRegime::weakly_anharmonic;
};

// Quadrant assignment. Heavy means E_J/E_C >= 1, high impedance means
// Z_C >= R_Q; points exactly on a boundary go to the heavy/high-impedance
// side so the labeling is deterministic.
//
//   heavy + low Z   -> flux
//   heavy + high Z  -> fluxonium
//   light + high Z  -> quasi-charge
//   light + low Z   -> weakly-anharmonic
RegimeReport classify(const QubitParams& p);

}  // namespace squidfit
