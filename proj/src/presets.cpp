#include "squidfit/presets.hpp"

namespace squidfit {

namespace {

std::vector<QubitPreset> make_presets() {
  std::vector<QubitPreset> v;
  auto add = [&v](std::string name, double e_l, double e_c, double e_j,
                  double kappa, double gc_n, double gl_phi,
                  std::optional<double> t1, std::optional<double> a_phi,
                  double zpf_ref, std::optional<double> omega_r) {
    QubitPreset p;
    p.name = std::move(name);
    p.params = QubitParams{e_l, e_c, e_j, 0.0};
    p.kappa_tot_mhz = kappa;
    p.gc_n_product_mhz = gc_n;
    p.gl_phi_product_mhz = gl_phi;
    p.t1_us_half_flux = t1;
    p.a_phi_sqrt_uphi0 = a_phi;
    p.phi_zpf_ref = zpf_ref;
    p.omega_r_ghz = omega_r;
    v.push_back(std::move(p));
  };
  add("qubit-A", 0.618, 2.75, 8.55, 1.70, 15.0, 0.1, 1.50, std::nullopt, 1.73,
      std::nullopt);
  add("qubit-B", 0.620, 3.15, 5.92, 0.63, 63.0, 140.0, 2.38, 317.0, 1.78,
      std::nullopt);
  add("qubit-C", 0.619, 3.25, 5.41, 0.74, 69.0, 100.0, 3.29, 338.0, 1.80,
      6.03);
  add("qubit-D", 0.620, 3.83, 3.05, 0.62, 41.0, 210.0, 1.81, 787.0, 1.88,
      std::nullopt);
  add("qubit-E", 0.205, 2.97, 4.89, 0.82, 6.0, 2.0, 9.62, 673.0, 2.32,
      std::nullopt);
  add("qubit-F", 0.215, 3.40, 1.99, 0.95, 90.0, 7.0, 2.25, 646.0, 2.42,
      std::nullopt);
  add("qubit-G", 0.78, 0.50, 3.15, 1.10, 17.0, 0.0, std::nullopt, std::nullopt,
      1.06, std::nullopt);
  add("qubit-H", 10.70, 0.54, 9.00, 0.95, 98.0, 0.0, std::nullopt,
      std::nullopt, 0.56, std::nullopt);
  return v;
}

}  // namespace

const std::vector<QubitPreset>& qubit_presets() {
  static const std::vector<QubitPreset> presets = make_presets();
  return presets;
}

const QubitPreset* find_preset(std::string_view name) {
  for (const auto& p : qubit_presets()) {
    if (p.name == name) return &p;
    // allow the bare letter as shorthand
    if (name.size() == 1 && p.name.size() == 7 && p.name.back() == name[0])
      return &p;
  }
  return nullptr;
}

}  // namespace squidfit
