#include "phase_grid.hpp"

#include <lapacke.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "squidfit/constants.hpp"

namespace grid_oracle {

namespace {
constexpr double kPi = 3.14159265358979324;
}

GridSpectrum grid_diagonalize(double e_l, double e_c, double e_j,
                              double phi_ext, const GridSpec& spec,
                              int n_levels) {
  if (!(e_l > 0.0) || !(e_c > 0.0) || !(e_j >= 0.0))
    throw std::invalid_argument("grid oracle: invalid circuit energies");
  if (spec.n_points < 3 || spec.n_points % 2 == 0)
    throw std::invalid_argument("grid oracle: n_points must be odd and >= 3");
  if (spec.phi_min > -8.0 * kPi || spec.phi_max < 8.0 * kPi)
    throw std::invalid_argument("grid oracle: range must cover [-8pi, 8pi]");

  const int n = spec.n_points;
  const double step = (spec.phi_max - spec.phi_min) / (n - 1);
  const double kinetic = 4.0 * e_c / (step * step);
  const double center = squidfit::constants::two_pi * phi_ext;

  GridSpectrum out;
  out.step = step;
  out.phi.resize(n);
  std::vector<double> diag(n), off(n - 1, -kinetic);
  for (int g = 0; g < n; ++g) {
    const double phi = spec.phi_min + g * step;
    out.phi[g] = phi;
    const double d = phi - center;
    diag[g] = 2.0 * kinetic + 0.5 * e_l * d * d - e_j * std::cos(phi);
  }

  const int k = n_levels;
  std::vector<double> w(n), z(static_cast<size_t>(n) * k);
  std::vector<lapack_int> isuppz(2 * static_cast<size_t>(k));
  lapack_int found = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0, 1, k,
      abstol, &found, w.data(), z.data(), n, isuppz.data());
  if (info != 0 || found < k)
    throw std::runtime_error("grid oracle: tridiagonal eigensolve failed, info=" +
                             std::to_string(info));

  out.energies.assign(w.begin(), w.begin() + k);
  out.states.resize(k);
  const double norm = 1.0 / std::sqrt(step);  // L2 columns -> quadrature norm
  for (int v = 0; v < k; ++v) {
    out.states[v].resize(n);
    for (int g = 0; g < n; ++g)
      out.states[v][g] = z[static_cast<size_t>(v) * n + g] * norm;
  }
  return out;
}

std::vector<double> grid_ground_pdf(double e_l, double e_c, double e_j,
                                    double phi_ext, const GridSpec& spec) {
  const GridSpectrum s = grid_diagonalize(e_l, e_c, e_j, phi_ext, spec, 1);
  const int n = static_cast<int>(s.phi.size());
  std::vector<double> pdf(n);
  for (int g = 0; g < n; ++g) pdf[g] = s.states[0][g] * s.states[0][g];
  double integral = 0.0;
  for (int g = 0; g + 1 < n; ++g)
    integral += 0.5 * (pdf[g] + pdf[g + 1]) * s.step;
  if (std::abs(integral - 1.0) > 1e-8)
    throw std::runtime_error("grid oracle: pdf normalization drift");
  for (double& v : pdf) v /= integral;
  return pdf;
}

double grid_delocalization(double e_l, double e_c, double e_j, double phi_ext,
                           const GridSpec& spec) {
  const GridSpectrum s = grid_diagonalize(e_l, e_c, e_j, phi_ext, spec, 1);
  const double lo = squidfit::constants::two_pi * phi_ext - kPi;
  const double hi = squidfit::constants::two_pi * phi_ext + kPi;
  const int n = static_cast<int>(s.phi.size());
  double inside = 0.0;
  for (int g = 0; g + 1 < n; ++g) {
    const double a = s.phi[g], b = s.phi[g + 1];
    const double fa = s.states[0][g] * s.states[0][g];
    const double fb = s.states[0][g + 1] * s.states[0][g + 1];
    const double left = std::max(a, lo), right = std::min(b, hi);
    if (right <= left) continue;
    const double slope = (fb - fa) / (b - a);
    inside += 0.5 * ((fa + slope * (left - a)) + (fa + slope * (right - a))) *
              (right - left);
  }
  return std::max(0.0, 1.0 - inside);
}

double grid_phi_matrix_element(const GridSpectrum& s, int i, int j) {
  double acc = 0.0;
  const int n = static_cast<int>(s.phi.size());
  for (int g = 0; g < n; ++g)
    acc += s.states[i][g] * s.phi[g] * s.states[j][g];
  return std::abs(acc * s.step);
}

double grid_n_matrix_element(const GridSpectrum& s, int i, int j) {
  // n = -i d/dphi; magnitude of integral psi_i * psi_j' via central
  // differences (boundary values vanish for bound states).
  double acc = 0.0;
  const int n = static_cast<int>(s.phi.size());
  for (int g = 1; g + 1 < n; ++g)
    acc += s.states[i][g] * (s.states[j][g + 1] - s.states[j][g - 1]) /
           (2.0 * s.step);
  return std::abs(acc * s.step);
}

double grid_convergence_shift(double e_l, double e_c, double e_j,
                              double phi_ext, const GridSpec& spec,
                              int levels) {
  const GridSpectrum coarse =
      grid_diagonalize(e_l, e_c, e_j, phi_ext, spec, levels);
  GridSpec fine = spec;
  fine.n_points = 2 * spec.n_points - 1;
  const GridSpectrum dense =
      grid_diagonalize(e_l, e_c, e_j, phi_ext, fine, levels);
  double shift = 0.0;
  for (int k = 0; k < levels; ++k)
    shift = std::max(shift, std::abs(coarse.energies[k] - dense.energies[k]));
  return shift;
}

}  // namespace grid_oracle
