#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "squidfit/qubit.hpp"

namespace squidfit {

// Shipped reference parameter sets for the eight measured devices, keyed
// "qubit-A" .. "qubit-H". Coupling columns are the fitted coupling constants
// multiplied by the corresponding 0-1 matrix element at half flux, which is
// how the couplings were originally reported; divide by the computed matrix
// element to recover a bare g.
struct QubitPreset {
  std::string name;
  QubitParams params;  // phi_ext left at 0
  double kappa_tot_mhz = 0.0;
  double gc_n_product_mhz = 0.0;    // g_C |<0|n|1>| at half flux, MHz
  double gl_phi_product_mhz = 0.0;  // g_L |<0|phi|1>| at half flux, MHz
  std::optional<double> t1_us_half_flux;
  std::optional<double> a_phi_sqrt_uphi0;  // sqrt(A_Phi), micro Phi0
  double phi_zpf_ref = 0.0;                // reference value, two decimals
  std::optional<double> omega_r_ghz;       // readout frequency when published
};

const std::vector<QubitPreset>& qubit_presets();

// nullptr when the name is unknown. Accepts "qubit-A" and the bare letter.
const QubitPreset* find_preset(std::string_view name);

}  // namespace squidfit
