#pragma once

// Physical constants (CODATA 2018). Single source of truth for all SI
// conversions in the project; everything outside this unit works in GHz,
// Phi0, fF, nH and microseconds.

namespace squidfit::constants {

inline constexpr double elementary_charge = 1.602176634e-19;  // C (exact)
inline constexpr double planck_h = 6.62607015e-34;            // J s (exact)
inline constexpr double boltzmann_k = 1.380649e-23;           // J/K (exact)

inline constexpr double two_pi = 6.283185307179586;
inline constexpr double hbar = planck_h / two_pi;  // J s

// Magnetic flux quantum Phi0 = h / 2e.
inline constexpr double flux_quantum = planck_h / (2.0 * elementary_charge);

// Superconducting resistance quantum R_Q = h / (2e)^2 ~ 6.4532 kOhm.
inline constexpr double resistance_quantum =
    planck_h / (4.0 * elementary_charge * elementary_charge);

// Charging energy E_C = e^2/2C expressed as a frequency: E_C/h in GHz for C
// in fF, and the inverse map.
inline constexpr double ec_ghz_from_capacitance_ff(double c_ff) {
  return elementary_charge * elementary_charge / (2.0 * c_ff * 1e-15) /
         planck_h / 1e9;
}
inline constexpr double capacitance_ff_from_ec_ghz(double e_c_ghz) {
  return elementary_charge * elementary_charge / (2.0 * e_c_ghz * 1e9 * planck_h) /
         1e-15;
}

// Inductive energy E_L = (Phi0/2pi)^2 / L as a frequency: E_L/h in GHz for L
// in nH, and the inverse map.
inline constexpr double el_ghz_from_inductance_nh(double l_nh) {
  const double phi0_over_2pi = flux_quantum / two_pi;
  return phi0_over_2pi * phi0_over_2pi / (l_nh * 1e-9) / planck_h / 1e9;
}
inline constexpr double inductance_nh_from_el_ghz(double e_l_ghz) {
  const double phi0_over_2pi = flux_quantum / two_pi;
  return phi0_over_2pi * phi0_over_2pi / (e_l_ghz * 1e9 * planck_h) / 1e-9;
}

}  // namespace squidfit::constants
