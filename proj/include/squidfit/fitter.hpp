#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "squidfit/coupled.hpp"
#include "squidfit/dataset.hpp"
#include "squidfit/qubit.hpp"

// Two-stage gradient-free extraction of circuit parameters from
// spectroscopy data: first the bare qubit energies (E_L, E_C, E_J) against
// the single-mode model, then the coupling constants (g_C, g_L) against the
// coupled model with the qubit energies and the bare resonator frequency
// held fixed. Everything is deterministic; optional multi-start draws its
// perturbations from a caller-seeded generator.

namespace squidfit {

struct FittedParam {
  std::string name;
  double value = 0.0;
  double uncertainty = 0.0;  // curvature-based estimate, not a fit output
};

struct FitResult {
  std::vector<FittedParam> params;
  double rss = 0.0;  // weighted residual sum of squares, GHz^2
  int n_iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // signed, per dataset point used
  bool degenerate_warning = false;
  double anisotropy = 0.0;     // final-simplex axis ratio
  bool truncation_ok = true;   // doubled-truncation refit stability
  std::string message;

  double parameter(const std::string& name) const;
};

// A model maps one flux value to labeled lines.
using LineList = std::vector<std::pair<std::string, double>>;
using FluxModel = std::function<LineList(double phi_ext)>;

// Weighted residual sum of squares. Labeled points compare against their
// named line; unassigned points against the nearest line whose label prefix
// matches their kind ("q:" / "r:"), re-assigned on every call. A model
// failure contributes a large finite penalty.
double objective(const SpectroscopyDataset& dataset, const FluxModel& model);

// Signed residuals (f_obs - f_model) at fixed assignment rules.
std::vector<double> model_residuals(const SpectroscopyDataset& dataset,
                                    const FluxModel& model);

// Parsed transition label: q:i-j[+kph] or r:disp / r:kph.
struct LineId {
  int from_level = 0;
  int to_level = 0;
  int photons = 0;
  bool resonator = false;
};
LineId parse_line_label(const std::string& label);
std::string line_label_string(const LineId& id);

// Bare-qubit model lines: q:i-j from the eigenvalues, plus +kph replicas
// displaced by k * omega_r when a resonator frequency is supplied.
struct QubitModelOptions {
  int dim = 20;
  std::optional<double> omega_r_ghz;
};
FluxModel qubit_line_model(const QubitParams& base,
                           const std::vector<LineId>& lines,
                           const QubitModelOptions& opts = {});

// Coupled-model lines resolved by product-state overlap tracking.
struct CoupledModelOptions {
  int n_photons = 5;
  int n_qubit_levels = 20;
};
FluxModel coupled_line_model(const QubitParams& qubit, double omega_r,
                             double g_c, double g_l,
                             const std::vector<LineId>& lines,
                             const CoupledModelOptions& opts = {});

struct QubitFitOptions {
  int dim = 20;             // basis size during optimization
  double rss_tol = 1e-7;    // simplex value spread at convergence, GHz^2
  int max_iterations = 10000;
  double init_step = 0.15;  // simplex step in log-parameter space
  bool verify_truncation = true;  // refit at doubled dim, expect < 0.1% moves
  std::optional<double> omega_r_ghz;  // enables replica candidate lines
  int multi_start = 0;      // extra seeded starts beyond the given one
  std::uint64_t seed = 0;
};

// Nelder-Mead over (log E_L, log E_C, log E_J) against qubit-line points.
FitResult fit_qubit_params(const SpectroscopyDataset& dataset,
                           const QubitParams& initial,
                           const QubitFitOptions& opts = {});

struct CouplingFitOptions {
  int n_photons = 5;
  int n_qubit_levels = 20;
  double rss_tol = 1e-7;
  int max_iterations = 10000;
  double init_step_ghz = 0.05;
  bool fit_omega_r = false;  // also free the bare resonator frequency
  double anisotropy_threshold = 1e3;
  int multi_start = 0;
  std::uint64_t seed = 0;
};

// Optimizes (g_C, g_L) — and omega_r too when fit_omega_r is set — with the
// qubit parameters held fixed.
FitResult fit_coupling_params(const SpectroscopyDataset& dataset,
                              const QubitParams& qubit, double omega_r_bare,
                              std::pair<double, double> initial_g,
                              const CouplingFitOptions& opts = {});

struct PipelineResult {
  FitResult qubit_stage;
  FitResult coupling_stage;
};

PipelineResult fit_pipeline(const SpectroscopyDataset& dataset,
                            const QubitParams& initial_qubit,
                            std::pair<double, double> initial_g,
                            double omega_r_bare,
                            const QubitFitOptions& qubit_opts = {},
                            const CouplingFitOptions& coupling_opts = {});

// Deterministic JSON renderings of fit reports.
std::string fit_report_json(const FitResult& result);
std::string pipeline_report_json(const PipelineResult& result);

}  // namespace squidfit
