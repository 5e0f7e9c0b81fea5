#include <doctest.h>

#include <cmath>

#include "phase_grid.hpp"
#include "table_params.hpp"

using namespace grid_oracle;

namespace {
constexpr double kPi = 3.14159265358979324;
}

TEST_CASE("harmonic ladder at the default grid") {
  // E_J = 0 collapses to an oscillator with splitting sqrt(8 E_L E_C).
  const double e_l = 0.618, e_c = 2.75;
  const GridSpectrum s = grid_diagonalize(e_l, e_c, 0.0, 0.25);
  const double exact = std::sqrt(8.0 * e_l * e_c);
  for (int k = 0; k + 1 < 5; ++k)
    CHECK(std::abs((s.energies[k + 1] - s.energies[k]) - exact) < 1e-4);
}

TEST_CASE("self convergence under point doubling") {
  for (char q : {'A', 'E', 'F', 'H'}) {
    const auto p = reference_params(q, 0.5);
    const double shift = grid_convergence_shift(p.e_l, p.e_c, p.e_j, p.phi_ext);
    CAPTURE(q);
    CHECK(shift < 1e-4);  // 0.1 MHz
  }
}

TEST_CASE("boundary insensitivity") {
  const auto p = reference_params('F', 0.5);
  GridSpec wide;
  wide.phi_min = -12.0 * kPi;
  wide.phi_max = 12.0 * kPi;
  wide.n_points = 48001;  // matched spacing
  const GridSpectrum a = grid_diagonalize(p.e_l, p.e_c, p.e_j, 0.5);
  const GridSpectrum b = grid_diagonalize(p.e_l, p.e_c, p.e_j, 0.5, wide);
  for (int k = 0; k < 5; ++k)
    CHECK(std::abs(a.energies[k] - b.energies[k]) < 1e-5);  // 0.01 MHz
}

TEST_CASE("eigenfunction parity alternates in a symmetric potential") {
  const auto p = reference_params('A', 0.0);
  const GridSpectrum s = grid_diagonalize(p.e_l, p.e_c, p.e_j, 0.0, {}, 4);
  const int n = static_cast<int>(s.phi.size());
  for (int level = 0; level < 4; ++level) {
    double sym = 0.0, asym = 0.0;
    for (int g = 0; g < n; ++g) {
      const int mirror = n - 1 - g;
      sym += std::abs(s.states[level][g] + s.states[level][mirror]);
      asym += std::abs(s.states[level][g] - s.states[level][mirror]);
    }
    if (level % 2 == 0)
      CHECK(asym < 1e-6 * sym);
    else
      CHECK(sym < 1e-6 * asym);
  }
}

TEST_CASE("ground pdf integrates to one and matches the harmonic gaussian") {
  const double e_l = 2.0, e_c = 1.0;  // phi_zpf = 1
  const auto pdf = grid_ground_pdf(e_l, e_c, 0.0, 0.0);
  const GridSpectrum s = grid_diagonalize(e_l, e_c, 0.0, 0.0, {}, 1);
  double integral = 0.0, err = 0.0;
  const double sigma2 = std::sqrt(2.0 * e_c / e_l);  // phi_zpf^2
  for (size_t g = 0; g + 1 < pdf.size(); ++g)
    integral += 0.5 * (pdf[g] + pdf[g + 1]) * s.step;
  for (size_t g = 0; g < pdf.size(); ++g) {
    const double phi = s.phi[g];
    const double gauss = std::exp(-phi * phi / (2.0 * sigma2)) /
                         std::sqrt(2.0 * kPi * sigma2);
    err = std::max(err, std::abs(pdf[g] - gauss));
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(err < 1e-6);
}

TEST_CASE("coarse grids are detectable, the default grid is not coarse") {
  GridSpec coarse;
  coarse.n_points = 2001;
  const auto p = reference_params('H', 0.5);
  const double shift =
      grid_convergence_shift(p.e_l, p.e_c, p.e_j, 0.5, coarse);
  CHECK(shift > 1e-4);  // visible error at 2001 points for the stiffest set
  const double fine_shift = grid_convergence_shift(p.e_l, p.e_c, p.e_j, 0.5);
  CHECK(fine_shift < 1e-4);
}
