#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squidfit/qubit.hpp"

// Coupled qubit-resonator model
//
//   H = H_q + w_r a^dag a - i g_C n (a - a^dag) - g_L phi (a + a^dag)
//
// assembled on (qubit eigenbasis) x (resonator Fock space), with n and phi
// rotated into the qubit eigenbasis first. In that basis the qubit charge
// operator is purely imaginary, n = i A with A real antisymmetric, so the
// capacitive term -i g_C n (a - a^dag) = g_C A x (a - a^dag) is real
// symmetric and the whole Hamiltonian is a real symmetric matrix.
//
// An optional second linear mode (the coil's parasitic resonance) is charge
// coupled to the qubit only.

namespace squidfit {

struct CoupledParams {
  QubitParams qubit;
  double omega_r = 0.0;  // bare resonator frequency, GHz
  double g_c = 0.0;      // capacitive coupling, GHz (sign allowed)
  double g_l = 0.0;      // inductive coupling, GHz (sign allowed)
  int n_photons = 5;     // resonator truncation
  int n_qubit_levels = 20;
  int qubit_basis_dim = 0;  // Fock dim for the qubit pre-diagonalization;
                            // 0 selects max(40, 2 * n_qubit_levels)

  void validate() const;
  int basis_dim() const;
};

// Qubit sector after pre-diagonalization: lowest-level energies plus the
// rotated operators, n = i * n_imag.
struct QubitSector {
  Eigen::VectorXd energies;  // GHz, ascending
  Eigen::MatrixXd n_imag;
  Eigen::MatrixXd phi;
};
QubitSector make_qubit_sector(const QubitParams& p, int n_levels,
                              int basis_dim);

// Raw assembly hook; sector operators may be transformed by callers (tests
// exercise sign-convention invariance through this entry point).
Eigen::MatrixXd assemble_coupled(const QubitSector& sector, double omega_r,
                                 double g_c, double g_l, int n_photons);

// Assembled Hamiltonian with a symmetry audit (throws if the assembly is
// non-Hermitian beyond 1e-10 relative).
Eigen::MatrixXd build_coupled_hamiltonian(const CoupledParams& p);

struct ProductLabel {
  int qubit_level = 0;
  int photons = 0;
  double overlap = 0.0;  // squared overlap with the best product state
  bool mixed = false;    // best overlap below 0.5
};

struct DressedSolution {
  Eigen::VectorXd energies;
  std::vector<ProductLabel> labels;
  int n_qubit_levels = 0;
  int n_photons = 0;

  // Index of the dressed state dominated by |qubit_level, photons>; -1 when
  // every candidate has smaller overlap with that product state.
  int find(int qubit_level, int photons) const;
  double overlap_of(int qubit_level, int photons) const;
};

DressedSolution solve_coupled(const CoupledParams& p);

// Full eigen-decomposition for branch tracking: locate() returns the dressed
// state with maximal squared component on a given product state, which is
// well defined even through crossings.
struct DressedEigensystem {
  Eigen::VectorXd energies;
  Eigen::MatrixXd eigenvectors;
  int n_qubit_levels = 0;
  int n_photons = 0;

  std::pair<int, double> locate(int qubit_level, int photons) const;
};
DressedEigensystem solve_coupled_full(const CoupledParams& p);

// Transition lines from the dressed ground state at one flux point.
struct DressedLine {
  std::string label;  // "q:0-1", "r:disp", "q:0-1+1ph", "r:2ph", "mixed"
  double freq_ghz = 0.0;
  double overlap = 0.0;
};

struct SpectrumOptions {
  int n_lines = 8;  // transitions from the ground state, lowest first
};

std::vector<DressedLine> dressed_lines(const CoupledParams& p,
                                       const SpectrumOptions& opts = {});

struct FluxSpectrumRow {
  double phi_ext = 0.0;
  std::vector<DressedLine> lines;
};

// Sweeps phi_ext; each row carries the labeled transitions at that flux.
std::vector<FluxSpectrumRow> dressed_spectrum(
    const CoupledParams& p, std::span<const double> flux_values,
    const SpectrumOptions& opts = {});

// Half the difference between the photon-like transition with the qubit in
// its first excited state and in the ground state, in MHz. Throws near
// crossings where the product labels cannot be resolved.
double dispersive_shift_mhz(const CoupledParams& p, double phi_ext);

// ---------------------------------------------------------------------------
// Parasitic coil mode

struct ParasiticParams {
  double c_q_ff = 0.0;   // qubit shunt capacitance, fF
  double l_q_nh = 0.0;   // qubit inductance, nH
  double c_p_ff = 0.0;   // parasitic branch capacitance, fF
  double l_p_uh = 0.0;   // parasitic branch inductance, uH
  double e_j_ghz = 0.0;  // junction energy, GHz (0 = not specified)

  void validate() const;
  double series_capacitance_ff() const;  // (1/C_p + 1/C_q)^-1
};

// Mode frequency omega_p / 2 pi = 1 / (2 pi sqrt(L_p C_ser)) in GHz.
double parasitic_mode_frequency(const ParasiticParams& p);

// Literal evaluation of the closed-form coupling
//
//   g_p = (4 e / C_q) sqrt(hbar w_p C_ser / 2)
//
// expressed in GHz. The prefactor 4e = 2 * (2e) means the result multiplies
// a charge operator counted in Cooper pairs; parasitic_coupling_single_charge
// returns the single-electron-normalized variant (half the value). The two
// are reported side by side because the convention is ambiguous upstream.
double parasitic_coupling(const ParasiticParams& p);
double parasitic_coupling_single_charge(const ParasiticParams& p);

// Circuit energies implied by the lumped element values.
QubitParams qubit_params_from_circuit(const ParasiticParams& p,
                                      double phi_ext = 0.0);

struct ThreeModeOptions {
  int n_parasitic_levels = 4;
  std::optional<double> omega_p_ghz;  // override the derived mode frequency
  std::optional<double> g_p_ghz;      // override the derived coupling
  int max_total_dim = 4096;
};

// Qubit x readout resonator x parasitic mode, the parasitic mode charge
// coupled to the qubit only.
Eigen::MatrixXd build_three_mode_hamiltonian(const CoupledParams& p,
                                             const ParasiticParams& pp,
                                             const ThreeModeOptions& opts = {});

struct ThreeModeLabel {
  int qubit_level = 0;
  int photons = 0;
  int parasitic = 0;
  double overlap = 0.0;
  bool mixed = false;
};

struct ThreeModeSolution {
  Eigen::VectorXd energies;
  std::vector<ThreeModeLabel> labels;
  int n_qubit_levels = 0, n_photons = 0, n_parasitic = 0;
  int find(int qubit_level, int photons, int parasitic) const;
};

ThreeModeSolution solve_three_mode(const CoupledParams& p,
                                   const ParasiticParams& pp,
                                   const ThreeModeOptions& opts = {});

// ---------------------------------------------------------------------------
// Lumped-circuit admittance: parallel C_q / L_q tank with a series L_p C_p
// branch,  Y(w) = j w C_q + 1/(j w L_q) + j w C_p / (1 - w^2 L_p C_p).

struct AdmittanceSample {
  double freq_ghz = 0.0;
  std::complex<double> y_siemens;
};

std::complex<double> lumped_admittance(double freq_ghz,
                                       const ParasiticParams& p);

struct AdmittanceFitResult {
  ParasiticParams params;  // e_j_ghz left at 0
  double rss = 0.0;        // relative residual sum of squares
  int n_iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // |Y_model - Y_obs| / |Y_obs| per sample
};

struct AdmittanceFitOptions {
  std::optional<ParasiticParams> initial;  // heuristic seed when absent
  double rss_tol = 1e-12;
  int max_iterations = 20000;
};

AdmittanceFitResult fit_lumped_admittance(
    std::span<const AdmittanceSample> samples,
    const AdmittanceFitOptions& opts = {});

}  // namespace squidfit
