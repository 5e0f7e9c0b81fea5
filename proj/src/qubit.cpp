#include "squidfit/qubit.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "squidfit/constants.hpp"

namespace squidfit {

namespace {

constexpr double kPi = 3.14159265358979324;

[[noreturn]] void eigensolver_failure(const Eigen::MatrixXd& h) {
  std::ostringstream msg;
  msg << "eigensolver failed to converge: dim=" << h.rows()
      << " fro_norm=" << h.norm() << " diag_min=" << h.diagonal().minCoeff()
      << " diag_max=" << h.diagonal().maxCoeff();
  throw std::runtime_error(msg.str());
}

Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& h,
                                Eigen::MatrixXd* evecs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.compute(h, evecs ? Eigen::ComputeEigenvectors
                          : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) eigensolver_failure(h);
  if (evecs) *evecs = solver.eigenvectors();
  return solver.eigenvalues();
}

// Eigen returns ascending eigenvalues; for numerically degenerate pairs the
// internal order is unspecified, so ties are broken by the index of the
// dominant basis coefficient.
void order_degenerate(Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  for (int k = 0; k + 1 < vals.size(); ++k) {
    if (std::abs(vals[k + 1] - vals[k]) > 1e-12 * scale) continue;
    int lead_a = 0, lead_b = 0;
    vecs.col(k).cwiseAbs().maxCoeff(&lead_a);
    vecs.col(k + 1).cwiseAbs().maxCoeff(&lead_b);
    if (lead_b < lead_a) {
      std::swap(vals[k], vals[k + 1]);
      vecs.col(k).swap(vecs.col(k + 1));
    }
  }
}

Eigen::MatrixXd hamiltonian_matrix(const QubitParams& p,
                                   const FockOperators& ops) {
  const double delta = constants::two_pi * p.phi_ext;
  Eigen::MatrixXd shifted = ops.phi;
  shifted.diagonal().array() -= delta;
  // n^2 = (i n_imag)^2 = -n_imag^2, real symmetric.
  Eigen::MatrixXd h = 4.0 * p.e_c * (-(ops.n_imag * ops.n_imag)) +
                      0.5 * p.e_l * (shifted * shifted) -
                      p.e_j * ops.cos_phi;
  return 0.5 * (h + h.transpose().eval());
}

}  // namespace

void QubitParams::validate() const {
  if (!(e_l > 0.0) || !std::isfinite(e_l))
    throw std::invalid_argument("QubitParams: e_l must be positive");
  if (!(e_c > 0.0) || !std::isfinite(e_c))
    throw std::invalid_argument("QubitParams: e_c must be positive");
  if (!(e_j >= 0.0) || !std::isfinite(e_j))
    throw std::invalid_argument("QubitParams: e_j must be non-negative");
  if (!std::isfinite(phi_ext))
    throw std::invalid_argument("QubitParams: phi_ext must be finite");
}

double critical_current_to_ej(double i_c_na) {
  if (!(i_c_na >= 0.0))
    throw std::invalid_argument("critical current must be non-negative");
  const double i_c = i_c_na * 1e-9;
  return i_c * constants::flux_quantum / constants::two_pi /
         constants::planck_h / 1e9;
}

double phase_zpf(const QubitParams& p) {
  p.validate();
  return std::pow(2.0 * p.e_c / p.e_l, 0.25);
}

FockOperators build_fock_operators(double phi_zpf, int dim) {
  if (dim < 4) throw std::invalid_argument("operator basis needs dim >= 4");
  if (!(phi_zpf > 0.0))
    throw std::invalid_argument("phi_zpf must be positive");

  FockOperators ops;
  ops.dim = dim;
  ops.phi_zpf = phi_zpf;

  ops.phi = Eigen::MatrixXd::Zero(dim, dim);
  ops.n_imag = Eigen::MatrixXd::Zero(dim, dim);
  for (int m = 0; m + 1 < dim; ++m) {
    const double ladder = std::sqrt(static_cast<double>(m + 1));
    ops.phi(m, m + 1) = phi_zpf * ladder;
    ops.phi(m + 1, m) = phi_zpf * ladder;
    // n = i (a^dag - a) / (2 phi_zpf) = i * n_imag
    ops.n_imag(m + 1, m) = ladder / (2.0 * phi_zpf);
    ops.n_imag(m, m + 1) = -ladder / (2.0 * phi_zpf);
  }

  // cos(phi) through the spectral decomposition of phi; exact within the
  // truncated basis and safe for phi_zpf of order unity and above.
  Eigen::MatrixXd u;
  Eigen::VectorXd lambda = solve_symmetric(ops.phi, &u);
  ops.cos_phi = u * lambda.array().cos().matrix().asDiagonal() * u.transpose();
  ops.cos_phi = 0.5 * (ops.cos_phi + ops.cos_phi.transpose());
  return ops;
}

OperatorSet build_operators(const QubitParams& p, int dim) {
  p.validate();
  const FockOperators ops = build_fock_operators(phase_zpf(p), dim);
  const std::complex<double> iu(0.0, 1.0);
  OperatorSet set;
  set.dim = dim;
  set.phi_op = ops.phi.cast<std::complex<double>>();
  set.cos_phi_op = ops.cos_phi.cast<std::complex<double>>();
  set.n_op = iu * ops.n_imag.cast<std::complex<double>>();
  return set;
}

SpectrumResult diagonalize(const QubitParams& p, int dim) {
  p.validate();
  const FockOperators ops = build_fock_operators(phase_zpf(p), dim);
  SpectrumResult result;
  result.dim = dim;
  result.energies = solve_symmetric(hamiltonian_matrix(p, ops),
                                    &result.eigenvectors);
  order_degenerate(result.energies, result.eigenvectors);
  return result;
}

SpectrumResult diagonalize_converged(const QubitParams& p,
                                     const ConvergenceOptions& opts) {
  if (opts.start_dim < 4 || opts.max_dim < opts.start_dim)
    throw std::invalid_argument("invalid convergence dims");

  SpectrumResult current = diagonalize(p, opts.start_dim);
  for (int dim = opts.start_dim; 2 * dim <= opts.max_dim; dim *= 2) {
    SpectrumResult next = diagonalize(p, 2 * dim);
    const int levels = std::min<int>(opts.levels, current.energies.size());
    double shift = 0.0;
    for (int k = 0; k < levels; ++k)
      shift = std::max(shift, std::abs(next.energies[k] - current.energies[k]));
    if (shift < opts.tol_ghz) {
      current.converged = true;
      current.convergence_error = shift;
      return current;
    }
    next.convergence_error = shift;
    current = std::move(next);
  }
  current.converged = false;
  return current;
}

double transition_frequency(const QubitParams& p, int i, int j, int dim) {
  if (!(0 <= i && i < j && j < dim))
    throw std::out_of_range("transition_frequency needs 0 <= i < j < dim");
  return diagonalize(p, dim).transition(i, j);
}

double matrix_element(const QubitParams& p, QubitOperator op, int i, int j,
                      int dim) {
  if (i < 0 || j < 0 || i >= dim || j >= dim)
    throw std::out_of_range("matrix_element level index out of range");
  const FockOperators ops = build_fock_operators(phase_zpf(p), dim);
  SpectrumResult spectrum;
  spectrum.energies = solve_symmetric(hamiltonian_matrix(p, ops),
                                      &spectrum.eigenvectors);
  order_degenerate(spectrum.energies, spectrum.eigenvectors);
  const Eigen::VectorXd vi = spectrum.eigenvectors.col(i);
  const Eigen::VectorXd vj = spectrum.eigenvectors.col(j);
  // Eigenvectors are real here, so <i|phi|j> is real and <i|n|j> is purely
  // imaginary; magnitudes are reported to stay convention-free.
  if (op == QubitOperator::phi) return std::abs(vi.dot(ops.phi * vj));
  return std::abs(vi.dot(ops.n_imag * vj));
}

PhasePdf ground_state_phase_pdf(const QubitParams& p, int dim,
                                const PhiRange& grid) {
  p.validate();
  if (grid.n_points < 2)
    throw std::invalid_argument("phase grid needs at least 2 points");
  if (grid.phi_min > -6.0 * kPi || grid.phi_max < 6.0 * kPi)
    throw std::invalid_argument("phase grid must span at least [-6pi, 6pi]");

  const double zpf = phase_zpf(p);
  const SpectrumResult spectrum = diagonalize(p, dim);
  const Eigen::VectorXd coeff = spectrum.eigenvectors.col(0);

  const int n = grid.n_points;
  PhasePdf pdf;
  pdf.phi.resize(n);
  pdf.density.resize(n);

  // Oscillator eigenfunctions with length scale l = phi_zpf * sqrt(2),
  // evaluated by the stable recurrence on normalized Hermite functions.
  const double len = zpf * std::sqrt(2.0);
  const double step = (grid.phi_max - grid.phi_min) / (n - 1);
  Eigen::VectorXd h_prev(n), h_curr(n), psi(n);
  for (int g = 0; g < n; ++g) {
    const double phi = grid.phi_min + g * step;
    pdf.phi[g] = phi;
    const double y = phi / len;
    h_prev[g] = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  }
  psi = coeff[0] * h_prev;
  if (dim > 1) {
    for (int g = 0; g < n; ++g)
      h_curr[g] = std::sqrt(2.0) * (pdf.phi[g] / len) * h_prev[g];
    psi += coeff[1] * h_curr;
    for (int m = 1; m + 1 < dim; ++m) {
      const double c1 = std::sqrt(2.0 / (m + 1.0));
      const double c2 = std::sqrt(m / (m + 1.0));
      for (int g = 0; g < n; ++g) {
        const double next = c1 * (pdf.phi[g] / len) * h_curr[g] - c2 * h_prev[g];
        h_prev[g] = h_curr[g];
        h_curr[g] = next;
      }
      psi += coeff[m + 1] * h_curr;
    }
  }

  pdf.density = psi.array().square() / len;

  double integral = 0.0;
  for (int g = 0; g + 1 < n; ++g)
    integral += 0.5 * (pdf.density[g] + pdf.density[g + 1]) * step;
  if (std::abs(integral - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "phase pdf not normalized (integral=" << integral
        << "); increase dim or widen the grid";
    throw std::runtime_error(msg.str());
  }
  return pdf;
}

double delocalization_probability(const QubitParams& p, int dim) {
  const PhasePdf pdf = ground_state_phase_pdf(p, dim);
  const double center = constants::two_pi * p.phi_ext;
  const double lo = center - kPi;
  const double hi = center + kPi;

  // Accumulate the inside-window weight with exact linear interpolation at
  // the window edges, then return the complement.
  double inside = 0.0;
  const int n = pdf.phi.size();
  for (int g = 0; g + 1 < n; ++g) {
    const double a = pdf.phi[g], b = pdf.phi[g + 1];
    const double fa = pdf.density[g], fb = pdf.density[g + 1];
    const double left = std::max(a, lo), right = std::min(b, hi);
    if (right <= left) continue;
    const double slope = (fb - fa) / (b - a);
    const double f_left = fa + slope * (left - a);
    const double f_right = fa + slope * (right - a);
    inside += 0.5 * (f_left + f_right) * (right - left);
  }
  return std::max(0.0, 1.0 - inside);
}

}  // namespace squidfit
