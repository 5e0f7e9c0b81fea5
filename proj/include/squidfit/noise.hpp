#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squidfit/qubit.hpp"

// Closed-form decoherence models.
//
// Energy relaxation from dielectric loss:
//
//   Gamma_1 = |<0|phi|1>|^2 hbar w_q^2 C / ((2e)^2 Q_diel) coth(hbar w_q / 2 k T)
//
// Echo dephasing from 1/f flux noise with spectral density S(w) = A_Phi / w:
//
//   Gamma_2 = |dw_q/dPhi| sqrt(A_Phi) gamma + 1/(2 T_1) + 1/T_phi
//
// and photon-number-split spectroscopy lineshapes: a Poisson-weighted sum of
// Lorentzians spaced by 2 chi.

namespace squidfit {

struct T1Model {
  double q_diel = 0.0;        // dielectric quality factor
  double temperature_k = 0.0; // must be supplied; no universal default
  std::optional<double> c_total_ff;  // total capacitance; derived from E_C
                                     // via C = e^2 / (2 E_C h) when absent

  void validate() const;
  double capacitance_ff(const QubitParams& qubit) const;
};

// T1 in microseconds; +infinity when the 0-1 phase matrix element vanishes
// (radiatively dark point).
double t1_capacitive_us(const QubitParams& qubit, double phi_ext,
                        const T1Model& model, int dim = 60);

struct T2Model {
  double a_phi_sqrt_uphi0 = 0.0;  // sqrt(A_Phi) in micro-Phi0
  double gamma_filter = 1.0;      // echo filter constant, caller supplied
  double t_phi_us = 0.0;          // photon shot-noise dephasing time

  void validate() const;
};

// |d f01 / d phi_ext| in GHz per Phi0, central difference with a Richardson
// cross-check (throws if the two estimates disagree badly).
double f01_flux_slope(const QubitParams& qubit, double phi_ext, int dim = 60,
                      double step = 1e-4);

// T2 echo in microseconds given T1 at the same flux.
double t2_echo_us(const QubitParams& qubit, double phi_ext,
                  const T2Model& model, double t1_us, int dim = 60);

struct TimePoint {
  double phi_ext = 0.0;
  double value_us = 0.0;
  double err_us = 0.0;
};

std::vector<TimePoint> read_time_csv(const std::string& path);
void write_time_csv(const std::string& path, std::span<const TimePoint> pts);

struct T1FitResult {
  double q_diel = 0.0;
  double q_diel_uncertainty = 0.0;
  double rss_log = 0.0;  // residual sum of squares in log(T1)
  int n_points = 0;
};

// One-parameter least squares of log T1 against the dielectric loss model;
// closed form since T1 is proportional to Q.
T1FitResult fit_t1_quality(std::span<const TimePoint> data,
                           const QubitParams& qubit, double temperature_k,
                           std::optional<double> c_total_ff = std::nullopt,
                           int dim = 60);

using T1Interp = std::function<double(double phi_ext)>;

struct T2FitResult {
  double a_phi_sqrt_uphi0 = 0.0;
  double a_phi_uncertainty = 0.0;
  double t_phi_us = 0.0;
  double t_phi_uncertainty = 0.0;
  double rss = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool wide_uncertainty = false;  // flat data; parameters poorly constrained
};

struct T2FitOptions {
  double gamma_filter = 1.0;
  int dim = 60;
  double rss_tol = 1e-12;
  int max_iterations = 20000;
  std::optional<std::pair<double, double>> initial;  // (sqrt(A), T_phi)
};

// Two-parameter least squares of the echo model, clamped at 2 T1, against
// T2-vs-flux data. The supplied t1 interpolant is evaluated per point.
T2FitResult fit_t2_flux_noise(std::span<const TimePoint> data,
                              const QubitParams& qubit, const T1Interp& t1_us,
                              const T2FitOptions& opts = {});

// The clamped model itself, exposed for cross-checks and plotting.
double t2_echo_model_us(const QubitParams& qubit, double phi_ext,
                        const T2Model& model, double t1_us, int dim = 60);

// ---------------------------------------------------------------------------
// Photon-number splitting

struct NumberSplitModel {
  double n_bar = 0.0;         // mean photon number
  double two_chi_mhz = 0.0;   // peak spacing (signed)
  double linewidth_mhz = 0.0; // Lorentzian FWHM
  double f0_ghz = 0.0;        // zero-photon peak
  double amplitude = 1.0;

  void validate() const;
};

// S(f) = amplitude * sum_k Poisson(k; n_bar) L(f; f0 + k 2chi, linewidth)
// with unit-peak Lorentzians; the sum stops once the Poisson weight falls
// below 1e-6 of its maximum.
Eigen::VectorXd number_split_lineshape(std::span<const double> freq_ghz,
                                       const NumberSplitModel& model);

struct TracePoint {
  double freq_ghz = 0.0;
  double amplitude = 0.0;
};

std::vector<TracePoint> read_trace_csv(const std::string& path);

struct NumberSplitFit {
  NumberSplitModel model;
  double rss = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool low_confidence = false;  // peaks not resolved (spacing < linewidth)
};

struct NumberSplitFitOptions {
  std::optional<NumberSplitModel> initial;  // peak-picking heuristic if absent
  double rss_tol = 1e-14;
  int max_iterations = 30000;
};

NumberSplitFit fit_number_splitting_trace(
    std::span<const TracePoint> trace,
    const NumberSplitFitOptions& opts = {});

// Per-trace fits for a power sweep, in input order.
std::vector<NumberSplitFit> fit_number_splitting(
    std::span<const std::vector<TracePoint>> traces,
    const NumberSplitFitOptions& opts = {});

}  // namespace squidfit
