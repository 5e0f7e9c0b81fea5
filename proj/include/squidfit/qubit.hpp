#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>

// Single-mode rf-SQUID circuit model
//
//   H = 4 E_C n^2 + (1/2) E_L (phi - 2 pi Phi_ext)^2 - E_J cos(phi)
//
// with all energies expressed as frequencies (E/h, GHz) and the external
// flux in units of the flux quantum. The Hamiltonian is represented in the
// harmonic-oscillator (Fock) basis of its linear part.
//
// Operator convention (fixed, several matrix-element results depend on it):
//
//   phi = phi_zpf (a + a^dag)          phi_zpf = (2 E_C / E_L)^(1/4)
//   n   = i (a^dag - a) / (2 phi_zpf)
//
// so that [phi, n] = i. The external flux is attached to the inductive term
// exactly as written above (not folded into the junction cosine). The two
// gauges are spectrally equivalent but give different matrix elements, so
// the choice is fixed here once.

namespace squidfit {

struct QubitParams {
  double e_l = 0.0;      // inductive energy E_L/h, GHz
  double e_c = 0.0;      // charging energy E_C/h, GHz
  double e_j = 0.0;      // Josephson energy E_J/h, GHz; 0 is the harmonic limit
  double phi_ext = 0.0;  // external flux, units of Phi0

  void validate() const;
};

// E_J/h in GHz for a junction critical current in nA: E_J = I_c Phi0 / 2 pi.
double critical_current_to_ej(double i_c_na);

// Zero-point phase spread of the linearized circuit, (2 E_C / E_L)^(1/4).
double phase_zpf(const QubitParams& p);

// Real-arithmetic building blocks in the Fock basis. The charge operator is
// purely imaginary in this basis, n = i * n_imag with n_imag real and
// antisymmetric; phi and cos_phi are real symmetric. cos_phi is evaluated
// through the spectral decomposition of phi, never a series expansion.
struct FockOperators {
  int dim = 0;
  double phi_zpf = 0.0;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd n_imag;
  Eigen::MatrixXd cos_phi;
};
FockOperators build_fock_operators(double phi_zpf, int dim);

// Contract form of the operator set: Hermitian matrices.
struct OperatorSet {
  int dim = 0;
  Eigen::MatrixXcd n_op;
  Eigen::MatrixXcd phi_op;
  Eigen::MatrixXcd cos_phi_op;
};
OperatorSet build_operators(const QubitParams& p, int dim);

struct SpectrumResult {
  Eigen::VectorXd energies;      // ascending, GHz
  Eigen::MatrixXd eigenvectors;  // columns, in the Fock construction basis
  int dim = 0;
  bool converged = false;  // lowest levels stable under dim doubling
  double convergence_error = std::numeric_limits<double>::quiet_NaN();

  double transition(int i, int j) const {
    if (i < 0 || j < 0 || i >= energies.size() || j >= energies.size())
      throw std::out_of_range("transition level index out of range");
    return energies[j] - energies[i];
  }
};

// Dense eigensolve at a fixed basis size. No convergence bookkeeping.
SpectrumResult diagonalize(const QubitParams& p, int dim);

struct ConvergenceOptions {
  int start_dim = 20;
  int max_dim = 160;
  double tol_ghz = 1e-4;  // 0.1 MHz on the tracked levels
  int levels = 5;
};

// Doubles the basis until the lowest `levels` eigenvalues move by less than
// tol_ghz, starting from start_dim and capped at max_dim.
SpectrumResult diagonalize_converged(const QubitParams& p,
                                     const ConvergenceOptions& opts = {});

double transition_frequency(const QubitParams& p, int i, int j, int dim);

enum class QubitOperator { n, phi };

// |<i|O|j>| in the eigenbasis at the given construction dimension.
double matrix_element(const QubitParams& p, QubitOperator op, int i, int j,
                      int dim);

struct PhiRange {
  double phi_min = -8.0 * 3.14159265358979324;
  double phi_max = 8.0 * 3.14159265358979324;
  int n_points = 8001;
};

struct PhasePdf {
  Eigen::VectorXd phi;      // grid, radians
  Eigen::VectorXd density;  // |psi_0|^2, trapezoid-normalized to 1
};

// Ground-state probability density over phase, assembled from the Fock-basis
// ground vector and oscillator eigenfunctions of length scale phi_zpf.
PhasePdf ground_state_phase_pdf(const QubitParams& p, int dim,
                                const PhiRange& grid = {});

// Ground-state weight found beyond one half well period from the inductive
// minimum: P(|phi - 2 pi Phi_ext| > pi). Measuring from the displaced well
// center makes the quantity gauge-independent; at zero flux it reduces to
// the plain P(|phi| > pi).
double delocalization_probability(const QubitParams& p, int dim);

}  // namespace squidfit
