#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "squidfit/coupled.hpp"
#include "squidfit/constants.hpp"
#include "table_params.hpp"

using namespace squidfit;

namespace {

CoupledParams coupled_from_products(char letter, double omega_r,
                                    double gc_n_mhz, double gl_phi_mhz,
                                    double phi_ext) {
  CoupledParams cp;
  cp.qubit = reference_params(letter, phi_ext);
  cp.omega_r = omega_r;
  QubitParams at_half = cp.qubit;
  at_half.phi_ext = 0.5;
  const double n01 = matrix_element(at_half, QubitOperator::n, 0, 1, 80);
  const double phi01 = matrix_element(at_half, QubitOperator::phi, 0, 1, 80);
  cp.g_c = gc_n_mhz * 1e-3 / n01;
  cp.g_l = gl_phi_mhz * 1e-3 / phi01;
  return cp;
}

}  // namespace

TEST_CASE("decoupled limit gives tensor sums") {
  CoupledParams cp;
  cp.qubit = reference_params('C', 0.31);
  cp.omega_r = 6.03;
  cp.g_c = 0.0;
  cp.g_l = 0.0;
  cp.n_photons = 4;
  cp.n_qubit_levels = 6;
  const DressedSolution sol = solve_coupled(cp);

  const SpectrumResult bare = diagonalize(cp.qubit, cp.basis_dim());
  std::vector<double> sums;
  for (int i = 0; i < cp.n_qubit_levels; ++i)
    for (int m = 0; m < cp.n_photons; ++m)
      sums.push_back(bare.energies[i] + m * cp.omega_r);
  std::sort(sums.begin(), sums.end());
  for (int k = 0; k < sol.energies.size(); ++k)
    CHECK(sol.energies[k] == doctest::Approx(sums[k]).epsilon(1e-9));
}

TEST_CASE("assembly is hermitian and fast at the production size") {
  const CoupledParams cp =
      coupled_from_products('B', 6.0, 63.0, 140.0, 0.27);
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::MatrixXd h = build_coupled_hamiltonian(cp);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const auto t1 = std::chrono::steady_clock::now();
  REQUIRE(h.rows() == 100);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(es.info() == Eigen::Success);
  const double ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  CHECK(ms < 50.0);
}

TEST_CASE("avoided crossing where the qubit line meets the resonator") {
  const CoupledParams base =
      coupled_from_products('B', 6.0, 63.0, 140.0, 0.0);
  bool bare_crossing = false;
  double prev_detuning = 0.0;
  double min_gap = 1e9;
  for (int i = 0; i <= 50; ++i) {
    const double flux = 0.5 * i / 50.0;
    QubitParams q = base.qubit;
    q.phi_ext = flux;
    const double detuning =
        diagonalize(q, base.basis_dim()).transition(0, 1) - base.omega_r;
    if (i > 0 && detuning * prev_detuning < 0.0) bare_crossing = true;
    prev_detuning = detuning;

    CoupledParams cp = base;
    cp.qubit.phi_ext = flux;
    const DressedEigensystem sys = solve_coupled_full(cp);
    const double f_q = sys.energies[sys.locate(1, 0).first] -
                       sys.energies[sys.locate(0, 0).first];
    const double f_r = sys.energies[sys.locate(0, 1).first] -
                       sys.energies[sys.locate(0, 0).first];
    min_gap = std::min(min_gap, std::abs(f_q - f_r));
  }
  CHECK(bare_crossing);   // the bare lines do cross
  CHECK(min_gap > 0.02);  // the dressed lines never touch
}

TEST_CASE("far detuned weak coupling leaves the photon line at omega_r") {
  CoupledParams cp;
  cp.qubit = reference_params('H', 0.0);  // f01 ~ 9 GHz
  cp.omega_r = 4.0;
  cp.g_c = 0.010;
  cp.g_l = 0.0;
  const DressedEigensystem sys = solve_coupled_full(cp);
  const double f_r = sys.energies[sys.locate(0, 1).first] -
                     sys.energies[sys.locate(0, 0).first];
  const double n01 =
      matrix_element(cp.qubit, QubitOperator::n, 0, 1, 80);
  const double f01 = diagonalize(cp.qubit, 80).transition(0, 1);
  const double g_eff = cp.g_c * n01;
  const double bound = 4.0 * g_eff * g_eff / std::abs(f01 - cp.omega_r);
  CHECK(std::abs(f_r - cp.omega_r) < bound + 1e-6);
}

TEST_CASE("dressed spectrum flux sweep is symmetric about half flux") {
  // The inductive coupling acts on the raw phase operator, which carries the
  // flux displacement in this gauge; that leaves a residual asymmetry of
  // order (2 pi g_L)^2 / omega_r (~1e-5 GHz here), far below any linewidth.
  // The sweep must be symmetric at the 0.1 MHz level.
  CoupledParams cp = coupled_from_products('F', 5.8, 90.0, 7.0, 0.0);
  cp.qubit_basis_dim = 120;
  const std::vector<double> flux{0.35, 0.45, 0.55, 0.65};
  const auto rows = dressed_spectrum(cp, flux, {});
  REQUIRE(rows.size() == 4);
  for (int pair = 0; pair < 2; ++pair) {
    const auto& lo = rows[pair == 0 ? 1 : 0];
    const auto& hi = rows[pair == 0 ? 2 : 3];
    REQUIRE(lo.lines.size() == hi.lines.size());
    for (size_t k = 0; k < lo.lines.size(); ++k)
      CHECK(std::abs(lo.lines[k].freq_ghz - hi.lines[k].freq_ghz) < 1e-4);
  }
}

TEST_CASE("multi-photon replica lines appear in the dressed ladder") {
  const CoupledParams cp =
      coupled_from_products('B', 6.0, 63.0, 140.0, 0.13);
  SpectrumOptions opts;
  opts.n_lines = 12;
  const auto lines = dressed_lines(cp, opts);
  bool has_replica = false;
  for (const auto& l : lines)
    if (l.label == "q:0-1+1ph") has_replica = true;
  CHECK(has_replica);
}

TEST_CASE("truncation robustness of the fitted-range lines") {
  for (double flux : {0.18, 0.4}) {
    CoupledParams small = coupled_from_products('B', 6.0, 63.0, 140.0, flux);
    small.qubit_basis_dim = 120;
    CoupledParams big = small;
    big.n_photons = 8;
    big.n_qubit_levels = 30;
    const DressedEigensystem a = solve_coupled_full(small);
    const DressedEigensystem b = solve_coupled_full(big);
    for (auto [ql, ph] : {std::pair{1, 0}, {2, 0}, {0, 1}, {1, 1}}) {
      const double fa = a.energies[a.locate(ql, ph).first] -
                        a.energies[a.locate(0, 0).first];
      const double fb = b.energies[b.locate(ql, ph).first] -
                        b.energies[b.locate(0, 0).first];
      CAPTURE(flux);
      CHECK(std::abs(fa - fb) < 1e-3);
    }
  }
}

TEST_CASE("sign conventions do not change the spectrum") {
  // Flipping the sign of g_l together with the sign convention of phi's
  // off-diagonals is a basis change; the spectrum must not move.
  const CoupledParams cp =
      coupled_from_products('C', 6.03, 69.0, 100.0, 0.22);
  QubitSector sector =
      make_qubit_sector(cp.qubit, cp.n_qubit_levels, cp.basis_dim());
  const Eigen::MatrixXd h1 =
      assemble_coupled(sector, cp.omega_r, cp.g_c, cp.g_l, cp.n_photons);
  QubitSector flipped = sector;
  flipped.phi = -sector.phi;
  const Eigen::MatrixXd h2 =
      assemble_coupled(flipped, cp.omega_r, cp.g_c, -cp.g_l, cp.n_photons);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(h1), e2(h2);
  for (int k = 0; k < 20; ++k)
    CHECK(e1.eigenvalues()[k] ==
          doctest::Approx(e2.eigenvalues()[k]).epsilon(1e-12));
}

TEST_CASE("dispersive shift") {
  SUBCASE("vanishes without coupling") {
    CoupledParams cp;
    cp.qubit = reference_params('C');
    cp.omega_r = 6.03;
    CHECK(dispersive_shift_mhz(cp, 0.5) == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("flips sign across a crossing") {
    // chi diverges where the resonator meets a transition out of the levels
    // it dresses; for this configuration that is the 1-2 transition, so the
    // sign flip is probed around the f12 = omega_r crossing.
    const CoupledParams cp =
        coupled_from_products('B', 6.0, 63.0, 140.0, 0.0);
    double cross = -1.0;
    QubitParams q0 = cp.qubit;
    q0.phi_ext = 0.25;
    double prev =
        diagonalize(q0, cp.basis_dim()).transition(1, 2) - cp.omega_r;
    for (int i = 1; i <= 50; ++i) {
      const double flux = 0.25 + 0.25 * i / 50.0;
      QubitParams q = cp.qubit;
      q.phi_ext = flux;
      const double det =
          diagonalize(q, cp.basis_dim()).transition(1, 2) - cp.omega_r;
      if (det * prev < 0.0) {
        cross = flux;
        break;
      }
      prev = det;
    }
    REQUIRE(cross > 0.0);
    const double chi_below = dispersive_shift_mhz(cp, cross - 0.03);
    const double chi_above = dispersive_shift_mhz(cp, cross + 0.03);
    CHECK(chi_below * chi_above < 0.0);
  }
}

TEST_CASE("parasitic mode frequency") {
  ParasiticParams pp{4.8, 530.0, 0.47, 1.3, 0.0};
  // frozen independent evaluation: 6.7466 GHz
  CHECK(parasitic_mode_frequency(pp) == doctest::Approx(6.7466).epsilon(1e-4));
  CHECK(parasitic_mode_frequency(pp) == doctest::Approx(6.74).epsilon(0.01));

  SUBCASE("series limit when the qubit capacitance dominates") {
    ParasiticParams big = pp;
    big.c_q_ff = 1e9;
    const double want = 1.0 / std::sqrt(1.3e-6 * 0.47e-15) /
                        constants::two_pi / 1e9;
    CHECK(parasitic_mode_frequency(big) ==
          doctest::Approx(want).epsilon(1e-9));
  }
  SUBCASE("series capacitance is below both branch values") {
    CHECK(pp.series_capacitance_ff() < 0.47);
    CHECK(pp.series_capacitance_ff() ==
          doctest::Approx(1.0 / (1.0 / 0.47 + 1.0 / 4.8)));
  }
}

TEST_CASE("parasitic coupling closed form") {
  const ParasiticParams pp{4.8, 530.0, 0.47, 1.3, 0.0};

  // Independent SI evaluation of the printed closed form with raw CODATA
  // digits: g = (4e/C_q) sqrt(hbar w_p C_ser / 2).
  const double e = 1.602176634e-19, h = 6.62607015e-34;
  const double hbar = h / (2.0 * 3.14159265358979324);
  const double c_ser = 1.0 / (1.0 / 0.47e-15 + 1.0 / 4.8e-15);
  const double w_p = 1.0 / std::sqrt(1.3e-6 * c_ser);
  const double oracle =
      4.0 * e / 4.8e-15 * std::sqrt(hbar * w_p * c_ser / 2.0) / h / 1e9;

  const double got = parasitic_coupling(pp);
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(got == doctest::Approx(6.2329).epsilon(1e-4));  // frozen
  CHECK(parasitic_coupling_single_charge(pp) ==
        doctest::Approx(0.5 * got).epsilon(1e-12));
  // The literal closed form does not land near the published 0.84 GHz under
  // either charge normalization; both variants are reported instead of
  // rescaling one of them into agreement.
  CHECK(got > 2.0);

  SUBCASE("vanishing series branch removes the coupling") {
    // g scales as C_ser^(1/4) (the mode frequency rises as C_ser shrinks),
    // so the decay toward zero is slow but strictly monotone.
    double prev = got;
    for (double c_p : {1e-2, 1e-5, 1e-8, 1e-11}) {
      ParasiticParams small = pp;
      small.c_p_ff = c_p;
      const double g = parasitic_coupling(small);
      CHECK(g < prev);
      const double expected =
          got * std::pow(small.series_capacitance_ff() /
                             pp.series_capacitance_ff(),
                         0.25);
      CHECK(g == doctest::Approx(expected).epsilon(1e-9));
      prev = g;
    }
    CHECK(prev < 1e-2 * got);
  }
}

TEST_CASE("circuit values map to circuit energies") {
  const ParasiticParams pp{4.8, 530.0, 0.47, 1.3, 1.99};
  const QubitParams q = qubit_params_from_circuit(pp);
  CHECK(q.e_c == doctest::Approx(4.035).epsilon(1e-3));
  CHECK(q.e_l == doctest::Approx(0.3084).epsilon(1e-3));
  CHECK(q.e_j == 1.99);
}

TEST_CASE("three-mode model") {
  CoupledParams cp = coupled_from_products('F', 5.8, 90.0, 7.0, 0.5);
  cp.n_qubit_levels = 8;
  cp.n_photons = 3;
  const ParasiticParams pp{4.8, 530.0, 0.47, 1.3, 1.99};

  SUBCASE("decoupled parasitic mode adds a bare ladder") {
    ThreeModeOptions opts;
    opts.g_p_ghz = 0.0;
    opts.n_parasitic_levels = 3;
    const ThreeModeSolution sol = solve_three_mode(cp, pp, opts);
    const DressedSolution two = solve_coupled(cp);
    const double omega_p = parasitic_mode_frequency(pp);
    std::vector<double> sums;
    for (int i = 0; i < two.energies.size(); ++i)
      for (int k = 0; k < 3; ++k)
        sums.push_back(two.energies[i] + k * omega_p);
    std::sort(sums.begin(), sums.end());
    for (int k = 0; k < sol.energies.size(); ++k)
      CHECK(sol.energies[k] == doctest::Approx(sums[k]).epsilon(1e-9));
  }

  SUBCASE("parasitic line shows up near its mode frequency") {
    ThreeModeOptions opts;
    opts.omega_p_ghz = 6.73;  // shipped reference values for this mode
    opts.g_p_ghz = 0.84;
    opts.n_parasitic_levels = 4;
    const ThreeModeSolution sol = solve_three_mode(cp, pp, opts);
    const int ground = sol.find(0, 0, 0);
    const int par = sol.find(0, 0, 1);
    REQUIRE(ground >= 0);
    REQUIRE(par >= 0);
    const double f_par = sol.energies[par] - sol.energies[ground];
    CHECK(f_par > 6.4);
    CHECK(f_par < 7.0);
  }

  SUBCASE("level repulsion grows monotonically with the coupling") {
    double last_shift = -1.0;
    for (double g : {0.2, 0.5, 0.9}) {
      ThreeModeOptions opts;
      opts.omega_p_ghz = 6.73;
      opts.g_p_ghz = g;
      opts.n_parasitic_levels = 4;
      const ThreeModeSolution sol = solve_three_mode(cp, pp, opts);
      const double f_par = sol.energies[sol.find(0, 0, 1)] -
                           sol.energies[sol.find(0, 0, 0)];
      const double shift = std::abs(f_par - 6.73);
      CHECK(shift > last_shift);
      last_shift = shift;
    }
  }

  SUBCASE("memory guard") {
    ThreeModeOptions opts;
    opts.n_parasitic_levels = 1000;
    CHECK_THROWS_AS(build_three_mode_hamiltonian(cp, pp, opts),
                    std::invalid_argument);
  }
}

TEST_CASE("lumped admittance fit") {
  const ParasiticParams truth{4.8, 530.0, 0.47, 1.3, 0.0};
  std::vector<AdmittanceSample> samples;
  for (int i = 0; i <= 240; ++i) {
    const double f = 0.5 + i * (7.5 - 0.5) / 240.0;
    samples.push_back({f, lumped_admittance(f, truth)});
  }

  SUBCASE("low frequency asymptote is inductive") {
    const double f = 0.02;
    const auto y = lumped_admittance(f, truth);
    const double w = constants::two_pi * f * 1e9;
    CHECK(y.imag() == doctest::Approx(-1.0 / (w * 530e-9)).epsilon(1e-3));
  }

  SUBCASE("round trip recovers the generating circuit") {
    const AdmittanceFitResult fit = fit_lumped_admittance(samples);
    CHECK(fit.params.c_q_ff == doctest::Approx(4.8).epsilon(0.01));
    CHECK(fit.params.l_q_nh == doctest::Approx(530.0).epsilon(0.01));
    CHECK(fit.params.c_p_ff == doctest::Approx(0.47).epsilon(0.01));
    CHECK(fit.params.l_p_uh == doctest::Approx(1.3).epsilon(0.01));
    // same circuit algebra: the fitted parameters reproduce the mode
    CHECK(parasitic_mode_frequency(fit.params) ==
          doctest::Approx(parasitic_mode_frequency(truth)).epsilon(1e-3));
  }
}
