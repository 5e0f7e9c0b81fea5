#include "squidfit/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "squidfit/constants.hpp"
#include "squidfit/neldermead.hpp"

namespace squidfit {

namespace {

Eigen::VectorXd solve_symmetric(const Eigen::MatrixXd& h,
                                Eigen::MatrixXd* evecs) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.compute(h, evecs ? Eigen::ComputeEigenvectors
                          : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "coupled eigensolve failed: dim=" << h.rows()
        << " fro_norm=" << h.norm();
    throw std::runtime_error(msg.str());
  }
  if (evecs) *evecs = solver.eigenvectors();
  return solver.eigenvalues();
}

// Ladder pieces for a linear mode with m levels.
Eigen::MatrixXd mode_number(int m) {
  Eigen::VectorXd d(m);
  for (int k = 0; k < m; ++k) d[k] = k;
  return d.asDiagonal();
}
Eigen::MatrixXd mode_sum(int m) {  // a + a^dag
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k + 1 < m; ++k) {
    const double v = std::sqrt(static_cast<double>(k + 1));
    s(k, k + 1) = v;
    s(k + 1, k) = v;
  }
  return s;
}
Eigen::MatrixXd mode_diff(int m) {  // a - a^dag
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k + 1 < m; ++k) {
    const double v = std::sqrt(static_cast<double>(k + 1));
    s(k, k + 1) = v;
    s(k + 1, k) = -v;
  }
  return s;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::string line_label(int qubit_level, int photons) {
  std::ostringstream s;
  if (qubit_level == 0) {
    if (photons == 1) return "r:disp";
    s << "r:" << photons << "ph";
    return s.str();
  }
  s << "q:0-" << qubit_level;
  if (photons > 0) s << "+" << photons << "ph";
  return s.str();
}

}  // namespace

void CoupledParams::validate() const {
  qubit.validate();
  if (!(omega_r > 0.0))
    throw std::invalid_argument("CoupledParams: omega_r must be positive");
  if (n_photons < 2 || n_qubit_levels < 2)
    throw std::invalid_argument("CoupledParams: truncations must be >= 2");
  if (!std::isfinite(g_c) || !std::isfinite(g_l))
    throw std::invalid_argument("CoupledParams: couplings must be finite");
}

int CoupledParams::basis_dim() const {
  if (qubit_basis_dim > 0) return qubit_basis_dim;
  return std::max(40, 2 * n_qubit_levels);
}

QubitSector make_qubit_sector(const QubitParams& p, int n_levels,
                              int basis_dim) {
  if (basis_dim < n_levels)
    throw std::invalid_argument("qubit sector: basis_dim < n_levels");
  const FockOperators ops = build_fock_operators(phase_zpf(p), basis_dim);
  const SpectrumResult spectrum = diagonalize(p, basis_dim);
  const Eigen::MatrixXd v = spectrum.eigenvectors.leftCols(n_levels);
  QubitSector sector;
  sector.energies = spectrum.energies.head(n_levels);
  sector.n_imag = v.transpose() * ops.n_imag * v;
  sector.phi = v.transpose() * ops.phi * v;
  return sector;
}

Eigen::MatrixXd assemble_coupled(const QubitSector& sector, double omega_r,
                                 double g_c, double g_l, int n_photons) {
  const int nq = static_cast<int>(sector.energies.size());
  const Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(nq, nq);
  const Eigen::MatrixXd ip =
      Eigen::MatrixXd::Identity(n_photons, n_photons);
  Eigen::MatrixXd h =
      kron(Eigen::MatrixXd(sector.energies.asDiagonal()), ip) +
      omega_r * kron(iq, mode_number(n_photons));
  // -i g_C n (a - a^dag) with n = i A  ->  + g_C A x (a - a^dag)
  h += g_c * kron(sector.n_imag, mode_diff(n_photons));
  h -= g_l * kron(sector.phi, mode_sum(n_photons));
  return h;
}

Eigen::MatrixXd build_coupled_hamiltonian(const CoupledParams& p) {
  p.validate();
  const QubitSector sector =
      make_qubit_sector(p.qubit, p.n_qubit_levels, p.basis_dim());
  Eigen::MatrixXd h =
      assemble_coupled(sector, p.omega_r, p.g_c, p.g_l, p.n_photons);
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale)
    throw std::runtime_error("coupled Hamiltonian assembly not Hermitian");
  return h;
}

int DressedSolution::find(int qubit_level, int photons) const {
  int best = -1;
  double best_overlap = 0.0;
  for (size_t k = 0; k < labels.size(); ++k) {
    if (labels[k].qubit_level != qubit_level || labels[k].photons != photons)
      continue;
    if (labels[k].overlap > best_overlap) {
      best_overlap = labels[k].overlap;
      best = static_cast<int>(k);
    }
  }
  return best;
}

double DressedSolution::overlap_of(int qubit_level, int photons) const {
  const int k = find(qubit_level, photons);
  return k < 0 ? 0.0 : labels[k].overlap;
}

std::pair<int, double> DressedEigensystem::locate(int qubit_level,
                                                  int photons) const {
  if (qubit_level < 0 || qubit_level >= n_qubit_levels || photons < 0 ||
      photons >= n_photons)
    throw std::out_of_range("locate: product label outside the truncation");
  const int row = qubit_level * n_photons + photons;
  int best = 0;
  eigenvectors.row(row).cwiseAbs().maxCoeff(&best);
  const double w = eigenvectors(row, best) * eigenvectors(row, best);
  return {best, w};
}

DressedEigensystem solve_coupled_full(const CoupledParams& p) {
  const Eigen::MatrixXd h = build_coupled_hamiltonian(p);
  DressedEigensystem sys;
  sys.energies = solve_symmetric(h, &sys.eigenvectors);
  sys.n_qubit_levels = p.n_qubit_levels;
  sys.n_photons = p.n_photons;
  return sys;
}

DressedSolution solve_coupled(const CoupledParams& p) {
  const Eigen::MatrixXd h = build_coupled_hamiltonian(p);
  Eigen::MatrixXd evecs;
  DressedSolution sol;
  sol.energies = solve_symmetric(h, &evecs);
  sol.n_qubit_levels = p.n_qubit_levels;
  sol.n_photons = p.n_photons;
  sol.labels.resize(sol.energies.size());
  for (int k = 0; k < sol.energies.size(); ++k) {
    int arg = 0;
    evecs.col(k).cwiseAbs().maxCoeff(&arg);
    const double w = evecs(arg, k) * evecs(arg, k);
    ProductLabel label;
    label.qubit_level = arg / p.n_photons;
    label.photons = arg % p.n_photons;
    label.overlap = w;
    label.mixed = w < 0.5;
    sol.labels[k] = label;
  }
  return sol;
}

std::vector<DressedLine> dressed_lines(const CoupledParams& p,
                                       const SpectrumOptions& opts) {
  const DressedSolution sol = solve_coupled(p);
  std::vector<DressedLine> lines;
  const int n_states = static_cast<int>(sol.energies.size());
  const double e0 = sol.energies[0];
  for (int k = 1; k < n_states && static_cast<int>(lines.size()) < opts.n_lines;
       ++k) {
    DressedLine line;
    line.freq_ghz = sol.energies[k] - e0;
    line.overlap = sol.labels[k].overlap;
    line.label = sol.labels[k].mixed
                     ? "mixed"
                     : line_label(sol.labels[k].qubit_level,
                                  sol.labels[k].photons);
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<FluxSpectrumRow> dressed_spectrum(
    const CoupledParams& p, std::span<const double> flux_values,
    const SpectrumOptions& opts) {
  std::vector<FluxSpectrumRow> rows(flux_values.size());
  for (size_t i = 0; i < flux_values.size(); ++i) {
    CoupledParams at = p;
    at.qubit.phi_ext = flux_values[i];
    rows[i].phi_ext = flux_values[i];
    rows[i].lines = dressed_lines(at, opts);
  }
  return rows;
}

double dispersive_shift_mhz(const CoupledParams& p, double phi_ext) {
  CoupledParams at = p;
  at.qubit.phi_ext = phi_ext;
  const DressedSolution sol = solve_coupled(at);
  const int s00 = sol.find(0, 0);
  const int s01 = sol.find(0, 1);
  const int s10 = sol.find(1, 0);
  const int s11 = sol.find(1, 1);
  if (s00 < 0 || s01 < 0 || s10 < 0 || s11 < 0 ||
      sol.labels[s00].mixed || sol.labels[s01].mixed ||
      sol.labels[s10].mixed || sol.labels[s11].mixed) {
    throw std::runtime_error(
        "dispersive shift: dressed levels too mixed to label; increase the "
        "truncation or evaluate away from the crossing");
  }
  const double f_r_ground = sol.energies[s01] - sol.energies[s00];
  const double f_r_excited = sol.energies[s11] - sol.energies[s10];
  return 0.5 * (f_r_excited - f_r_ground) * 1e3;
}

// ---------------------------------------------------------------------------

void ParasiticParams::validate() const {
  if (!(c_q_ff > 0.0) || !(l_q_nh > 0.0) || !(c_p_ff > 0.0) ||
      !(l_p_uh > 0.0))
    throw std::invalid_argument(
        "ParasiticParams: circuit values must be positive");
  if (e_j_ghz < 0.0)
    throw std::invalid_argument("ParasiticParams: e_j must be non-negative");
}

double ParasiticParams::series_capacitance_ff() const {
  return 1.0 / (1.0 / c_p_ff + 1.0 / c_q_ff);
}

double parasitic_mode_frequency(const ParasiticParams& p) {
  p.validate();
  const double l_p = p.l_p_uh * 1e-6;
  const double c_ser = p.series_capacitance_ff() * 1e-15;
  return 1.0 / std::sqrt(l_p * c_ser) / constants::two_pi / 1e9;
}

double parasitic_coupling(const ParasiticParams& p) {
  p.validate();
  const double c_q = p.c_q_ff * 1e-15;
  const double c_ser = p.series_capacitance_ff() * 1e-15;
  const double omega_p =
      parasitic_mode_frequency(p) * constants::two_pi * 1e9;  // rad/s
  const double g_joule = 4.0 * constants::elementary_charge / c_q *
                         std::sqrt(constants::hbar * omega_p * c_ser / 2.0);
  return g_joule / constants::planck_h / 1e9;
}

double parasitic_coupling_single_charge(const ParasiticParams& p) {
  return 0.5 * parasitic_coupling(p);
}

QubitParams qubit_params_from_circuit(const ParasiticParams& p,
                                      double phi_ext) {
  p.validate();
  QubitParams q;
  q.e_c = constants::ec_ghz_from_capacitance_ff(p.c_q_ff);
  q.e_l = constants::el_ghz_from_inductance_nh(p.l_q_nh);
  q.e_j = p.e_j_ghz;
  q.phi_ext = phi_ext;
  return q;
}

Eigen::MatrixXd build_three_mode_hamiltonian(const CoupledParams& p,
                                             const ParasiticParams& pp,
                                             const ThreeModeOptions& opts) {
  p.validate();
  if (opts.n_parasitic_levels < 2)
    throw std::invalid_argument("three-mode: parasitic truncation >= 2");
  const long total = static_cast<long>(p.n_qubit_levels) * p.n_photons *
                     opts.n_parasitic_levels;
  if (total > opts.max_total_dim) {
    std::ostringstream msg;
    msg << "three-mode dimension " << total << " exceeds cap "
        << opts.max_total_dim;
    throw std::invalid_argument(msg.str());
  }

  const double omega_p =
      opts.omega_p_ghz.value_or(parasitic_mode_frequency(pp));
  const double g_p = opts.g_p_ghz.value_or(parasitic_coupling(pp));

  const QubitSector sector =
      make_qubit_sector(p.qubit, p.n_qubit_levels, p.basis_dim());
  const int nq = p.n_qubit_levels;
  const int nr = p.n_photons;
  const int np = opts.n_parasitic_levels;
  const Eigen::MatrixXd iq = Eigen::MatrixXd::Identity(nq, nq);
  const Eigen::MatrixXd ir = Eigen::MatrixXd::Identity(nr, nr);
  const Eigen::MatrixXd ip = Eigen::MatrixXd::Identity(np, np);

  Eigen::MatrixXd h =
      kron(kron(Eigen::MatrixXd(sector.energies.asDiagonal()), ir), ip);
  h += p.omega_r * kron(kron(iq, mode_number(nr)), ip);
  h += omega_p * kron(kron(iq, ir), mode_number(np));
  h += p.g_c * kron(kron(sector.n_imag, mode_diff(nr)), ip);
  h -= p.g_l * kron(kron(sector.phi, mode_sum(nr)), ip);
  // parasitic mode charge couples to the qubit only
  h += g_p * kron(kron(sector.n_imag, ir), mode_diff(np));
  return h;
}

int ThreeModeSolution::find(int qubit_level, int photons,
                            int parasitic) const {
  int best = -1;
  double best_overlap = 0.0;
  for (size_t k = 0; k < labels.size(); ++k) {
    const auto& l = labels[k];
    if (l.qubit_level != qubit_level || l.photons != photons ||
        l.parasitic != parasitic)
      continue;
    if (l.overlap > best_overlap) {
      best_overlap = l.overlap;
      best = static_cast<int>(k);
    }
  }
  return best;
}

ThreeModeSolution solve_three_mode(const CoupledParams& p,
                                   const ParasiticParams& pp,
                                   const ThreeModeOptions& opts) {
  const Eigen::MatrixXd h = build_three_mode_hamiltonian(p, pp, opts);
  Eigen::MatrixXd evecs;
  ThreeModeSolution sol;
  sol.energies = solve_symmetric(h, &evecs);
  sol.n_qubit_levels = p.n_qubit_levels;
  sol.n_photons = p.n_photons;
  sol.n_parasitic = opts.n_parasitic_levels;
  const int nr = p.n_photons;
  const int np = opts.n_parasitic_levels;
  sol.labels.resize(sol.energies.size());
  for (int k = 0; k < sol.energies.size(); ++k) {
    int arg = 0;
    evecs.col(k).cwiseAbs().maxCoeff(&arg);
    ThreeModeLabel label;
    label.qubit_level = arg / (nr * np);
    label.photons = (arg / np) % nr;
    label.parasitic = arg % np;
    label.overlap = evecs(arg, k) * evecs(arg, k);
    label.mixed = label.overlap < 0.5;
    sol.labels[k] = label;
  }
  return sol;
}

// ---------------------------------------------------------------------------

std::complex<double> lumped_admittance(double freq_ghz,
                                       const ParasiticParams& p) {
  const double omega = constants::two_pi * freq_ghz * 1e9;
  const std::complex<double> jw(0.0, omega);
  const double c_q = p.c_q_ff * 1e-15;
  const double l_q = p.l_q_nh * 1e-9;
  const double c_p = p.c_p_ff * 1e-15;
  const double l_p = p.l_p_uh * 1e-6;
  return jw * c_q + 1.0 / (jw * l_q) +
         jw * c_p / (1.0 - omega * omega * l_p * c_p);
}

namespace {

ParasiticParams admittance_seed(std::span<const AdmittanceSample> samples) {
  // L_q from the inductive low-frequency asymptote, the series-branch pole
  // from the |Y| peak, C_q from a mid-band capacitive sample.
  const auto& lo = samples.front();
  ParasiticParams seed;
  const double w_lo = constants::two_pi * lo.freq_ghz * 1e9;
  seed.l_q_nh = std::max(1.0, -1.0 / (w_lo * lo.y_siemens.imag()) / 1e-9);

  size_t peak = 0;
  double best = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double mag = std::abs(samples[i].y_siemens);
    if (mag > best) {
      best = mag;
      peak = i;
    }
  }
  const double w_pole = constants::two_pi * samples[peak].freq_ghz * 1e9;

  // capacitive estimate just below the pole region
  double c_est = 1e-15;
  for (size_t i = samples.size(); i-- > 0;) {
    if (samples[i].freq_ghz < 0.8 * samples[peak].freq_ghz &&
        samples[i].y_siemens.imag() > 0.0) {
      const double w = constants::two_pi * samples[i].freq_ghz * 1e9;
      c_est = samples[i].y_siemens.imag() / w;
      break;
    }
  }
  seed.c_q_ff = std::max(0.1, c_est / 1e-15);
  seed.c_p_ff = 0.1 * seed.c_q_ff;
  seed.l_p_uh = 1.0 / (w_pole * w_pole * seed.c_p_ff * 1e-15) / 1e-6;
  return seed;
}

}  // namespace

AdmittanceFitResult fit_lumped_admittance(
    std::span<const AdmittanceSample> samples,
    const AdmittanceFitOptions& opts) {
  if (samples.size() < 4)
    throw std::invalid_argument("admittance fit needs at least 4 samples");

  const ParasiticParams seed =
      opts.initial ? *opts.initial : admittance_seed(samples);

  // Relative residuals with a floor on the denominator: samples sitting on
  // an admittance zero would otherwise dominate with unbounded weight.
  std::vector<double> sorted_mags;
  sorted_mags.reserve(samples.size());
  for (const auto& s : samples) sorted_mags.push_back(std::abs(s.y_siemens));
  std::sort(sorted_mags.begin(), sorted_mags.end());
  const double floor_mag = 0.01 * sorted_mags[sorted_mags.size() / 2];

  std::vector<double> weight(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    weight[i] =
        1.0 / (std::norm(samples[i].y_siemens) + floor_mag * floor_mag);

  // The model is linear in (C_q, 1/L_q) once the series branch is fixed, so
  // the search runs over (pole frequency, C_p) only and the tank values come
  // from a weighted 2x2 least-squares solve per trial.
  struct InnerSolve {
    double c_q_ff, l_q_nh, rss;
  };
  auto inner = [&](double f_pole_ghz, double c_p_ff) -> InnerSolve {
    const double c_p = c_p_ff * 1e-15;
    const double w_pole = constants::two_pi * f_pole_ghz * 1e9;
    const double l_p = 1.0 / (w_pole * w_pole * c_p);
    double s_ww = 0.0, s_wi = 0.0, s_ii = 0.0, b_w = 0.0, b_i = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const double w = constants::two_pi * samples[i].freq_ghz * 1e9;
      const double branch =
          w * c_p / (1.0 - w * w * l_p * c_p);  // Im of series branch
      const double d = branch - samples[i].y_siemens.imag();
      // residual_im = w * C_q - (1/L_q)/w + d
      s_ww += weight[i] * w * w;
      s_wi += weight[i] * (-1.0);
      s_ii += weight[i] / (w * w);
      b_w += weight[i] * w * d;
      b_i += weight[i] * (-d / w);
    }
    const double det = s_ww * s_ii - s_wi * s_wi;
    InnerSolve out{0.0, 0.0, 1e12};
    if (std::abs(det) < 1e-300) return out;
    const double c_q = (-b_w * s_ii + b_i * s_wi) / det;
    const double inv_l = (-b_i * s_ww + b_w * s_wi) / det;
    if (!(c_q > 0.0) || !(inv_l > 0.0)) return out;
    out.c_q_ff = c_q / 1e-15;
    out.l_q_nh = 1.0 / inv_l / 1e-9;
    ParasiticParams trial{out.c_q_ff, out.l_q_nh, c_p_ff, l_p / 1e-6, 0.0};
    double rss = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
      const std::complex<double> y =
          lumped_admittance(samples[i].freq_ghz, trial);
      rss += weight[i] * std::norm(y - samples[i].y_siemens);
    }
    out.rss = std::isfinite(rss) ? rss : 1e12;
    return out;
  };

  const double seed_pole =
      1.0 / std::sqrt(seed.l_p_uh * 1e-6 * seed.c_p_ff * 1e-15) /
      constants::two_pi / 1e9;
  auto objective = [&](const Eigen::VectorXd& x) {
    return inner(std::exp(x[0]), std::exp(x[1])).rss;
  };

  Eigen::VectorXd x0(2);
  x0 << std::log(seed_pole), std::log(seed.c_p_ff);
  NelderMeadOptions nm;
  nm.f_tol = opts.rss_tol;
  nm.max_iterations = opts.max_iterations;
  nm.init_step = 0.05;
  NelderMeadResult r = nelder_mead(objective, x0, nm);
  for (int restart = 0; restart < 4; ++restart) {
    NelderMeadOptions again = nm;
    again.init_step = 0.005;
    const NelderMeadResult next = nelder_mead(objective, r.x, again);
    const bool improved = next.f < r.f * (1.0 - 1e-9);
    r = next;
    if (!improved) break;
  }

  const double fit_pole = std::exp(r.x[0]);
  const double fit_cp = std::exp(r.x[1]);
  const InnerSolve best = inner(fit_pole, fit_cp);
  AdmittanceFitResult fit;
  fit.params.c_q_ff = best.c_q_ff;
  fit.params.l_q_nh = best.l_q_nh;
  fit.params.c_p_ff = fit_cp;
  fit.params.l_p_uh =
      1.0 / (std::pow(constants::two_pi * fit_pole * 1e9, 2) * fit_cp *
             1e-15) /
      1e-6;
  fit.rss = r.f;
  fit.n_iterations = r.iterations;
  fit.converged = r.converged;
  fit.residuals.reserve(samples.size());
  for (const auto& s : samples) {
    const std::complex<double> y = lumped_admittance(s.freq_ghz, fit.params);
    fit.residuals.push_back(std::abs(y - s.y_siemens) /
                            (std::abs(s.y_siemens) + 1e-30));
  }
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "admittance fit did not converge: rss=" << fit.rss
        << " after " << fit.n_iterations << " iterations";
    throw std::runtime_error(msg.str());
  }
  return fit;
}

}  // namespace squidfit
