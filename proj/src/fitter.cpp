#include "squidfit/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "squidfit/neldermead.hpp"

namespace squidfit {

namespace {

constexpr double kPenalty = 1e12;

// Distinct flux values in dataset order of first appearance; exact equality
// is intended (points at the same bias share one model evaluation).
std::vector<double> unique_flux(const SpectroscopyDataset& dataset) {
  std::vector<double> flux;
  for (const auto& p : dataset.points)
    if (std::find(flux.begin(), flux.end(), p.phi_ext) == flux.end())
      flux.push_back(p.phi_ext);
  return flux;
}

bool kind_matches(const SpectroscopyPoint& p, const std::string& label) {
  const bool resonator = label.rfind("r:", 0) == 0;
  return (p.kind == LineKind::resonator_line) == resonator;
}

double point_residual(const SpectroscopyPoint& p, const LineList& lines,
                      bool* ok) {
  *ok = true;
  if (!p.label.empty()) {
    for (const auto& [label, freq] : lines)
      if (label == p.label) return p.freq_ghz - freq;
    *ok = false;
    return 0.0;
  }
  double best = 0.0;
  double best_abs = std::numeric_limits<double>::infinity();
  for (const auto& [label, freq] : lines) {
    if (!kind_matches(p, label)) continue;
    const double r = p.freq_ghz - freq;
    if (std::abs(r) < best_abs) {
      best_abs = std::abs(r);
      best = r;
    }
  }
  if (!std::isfinite(best_abs)) *ok = false;
  return best;
}

std::vector<LineId> dataset_line_ids(const SpectroscopyDataset& dataset) {
  std::set<std::string> labels;
  bool unassigned_qubit = false, unassigned_resonator = false;
  for (const auto& p : dataset.points) {
    if (!p.label.empty()) {
      labels.insert(p.label);
    } else if (p.kind == LineKind::qubit_line) {
      unassigned_qubit = true;
    } else {
      unassigned_resonator = true;
    }
  }
  if (unassigned_qubit) {
    labels.insert("q:0-1");
    labels.insert("q:0-2");
    for (int k = 1; k <= dataset.meta.max_photon_replicas; ++k)
      labels.insert("q:0-1+" + std::to_string(k) + "ph");
  }
  if (unassigned_resonator) labels.insert("r:disp");

  std::vector<LineId> ids;
  ids.reserve(labels.size());
  for (const auto& l : labels) ids.push_back(parse_line_label(l));
  return ids;
}

struct CurvatureEstimate {
  double uncertainty = 0.0;
};

// Quadratic probe of the objective along one coordinate at the optimum.
double axis_uncertainty(const std::function<double(const Eigen::VectorXd&)>& f,
                        const Eigen::VectorXd& x, int axis, double f0,
                        double reduced_variance, double step) {
  Eigen::VectorXd hi = x, lo = x;
  hi[axis] += step;
  lo[axis] -= step;
  const double curvature = (f(hi) - 2.0 * f0 + f(lo)) / (step * step);
  if (curvature <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * reduced_variance / curvature);
}

FitResult run_simplex(
    const std::function<double(const Eigen::VectorXd&)>& objective_fn,
    const Eigen::VectorXd& start, const NelderMeadOptions& nm_opts,
    int multi_start, std::uint64_t seed) {
  NelderMeadResult best = nelder_mead(objective_fn, start, nm_opts);
  if (multi_start > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (int s = 0; s < multi_start; ++s) {
      Eigen::VectorXd x = start;
      for (int i = 0; i < x.size(); ++i) x[i] += jitter(rng);
      const NelderMeadResult r = nelder_mead(objective_fn, x, nm_opts);
      if (r.f < best.f) best = r;
    }
  }
  FitResult result;
  result.rss = best.f;
  result.n_iterations = best.iterations;
  result.converged = best.converged;
  result.anisotropy = simplex_anisotropy(best);
  result.params.resize(best.x.size());
  for (int i = 0; i < best.x.size(); ++i) result.params[i].value = best.x[i];
  if (multi_start > 0) {
    std::ostringstream msg;
    msg << "multi_start=" << multi_start << " seed=" << seed;
    result.message = msg.str();
  }
  return result;
}

}  // namespace

double FitResult::parameter(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p.value;
  throw std::out_of_range("no fitted parameter named '" + name + "'");
}

LineId parse_line_label(const std::string& label) {
  LineId id;
  if (label == "r:disp") {
    id.resonator = true;
    id.photons = 1;
    return id;
  }
  if (label.rfind("r:", 0) == 0) {
    const std::string body = label.substr(2);
    const size_t ph = body.find("ph");
    if (ph == std::string::npos || ph + 2 != body.size())
      throw std::invalid_argument("bad resonator label '" + label + "'");
    id.resonator = true;
    id.photons = std::stoi(body.substr(0, ph));
    if (id.photons < 1)
      throw std::invalid_argument("bad resonator label '" + label + "'");
    return id;
  }
  if (label.rfind("q:", 0) != 0)
    throw std::invalid_argument("unknown line label '" + label + "'");
  const std::string body = label.substr(2);
  const size_t dash = body.find('-');
  if (dash == std::string::npos)
    throw std::invalid_argument("bad qubit label '" + label + "'");
  id.from_level = std::stoi(body.substr(0, dash));
  std::string rest = body.substr(dash + 1);
  const size_t plus = rest.find('+');
  if (plus != std::string::npos) {
    std::string ph = rest.substr(plus + 1);
    if (ph.size() < 3 || ph.substr(ph.size() - 2) != "ph")
      throw std::invalid_argument("bad replica label '" + label + "'");
    id.photons = std::stoi(ph.substr(0, ph.size() - 2));
    rest = rest.substr(0, plus);
  }
  id.to_level = std::stoi(rest);
  if (id.from_level < 0 || id.to_level <= id.from_level || id.photons < 0)
    throw std::invalid_argument("bad qubit label '" + label + "'");
  return id;
}

std::string line_label_string(const LineId& id) {
  std::ostringstream s;
  if (id.resonator) {
    if (id.photons == 1) return "r:disp";
    s << "r:" << id.photons << "ph";
    return s.str();
  }
  s << "q:" << id.from_level << "-" << id.to_level;
  if (id.photons > 0) s << "+" << id.photons << "ph";
  return s.str();
}

double objective(const SpectroscopyDataset& dataset, const FluxModel& model) {
  const std::vector<double> flux = unique_flux(dataset);
  std::map<double, LineList> cache;
  for (double f : flux) {
    try {
      cache[f] = model(f);
    } catch (const std::exception&) {
      return kPenalty;
    }
  }
  double rss = 0.0;
  for (const auto& p : dataset.points) {
    bool ok = true;
    const double r = point_residual(p, cache[p.phi_ext], &ok);
    if (!ok) return kPenalty;
    rss += p.weight * r * r;
  }
  return std::isfinite(rss) ? rss : kPenalty;
}

std::vector<double> model_residuals(const SpectroscopyDataset& dataset,
                                    const FluxModel& model) {
  const std::vector<double> flux = unique_flux(dataset);
  std::map<double, LineList> cache;
  for (double f : flux) cache[f] = model(f);
  std::vector<double> out;
  out.reserve(dataset.points.size());
  for (const auto& p : dataset.points) {
    bool ok = true;
    const double r = point_residual(p, cache[p.phi_ext], &ok);
    if (!ok)
      throw std::runtime_error("point labeled '" + p.label +
                               "' has no matching model line");
    out.push_back(r);
  }
  return out;
}

FluxModel qubit_line_model(const QubitParams& base,
                           const std::vector<LineId>& lines,
                           const QubitModelOptions& opts) {
  int max_level = 1;
  for (const auto& id : lines) {
    if (id.resonator)
      throw std::invalid_argument(
          "bare-qubit model cannot produce resonator lines");
    if (id.photons > 0 && !opts.omega_r_ghz)
      throw std::invalid_argument(
          "replica lines need omega_r in the qubit model options");
    max_level = std::max(max_level, id.to_level);
  }
  if (max_level >= opts.dim)
    throw std::invalid_argument("requested level beyond the basis size");

  return [base, lines, opts](double phi_ext) {
    QubitParams p = base;
    p.phi_ext = phi_ext;
    const SpectrumResult s = diagonalize(p, opts.dim);
    LineList out;
    out.reserve(lines.size());
    for (const auto& id : lines) {
      double freq = s.energies[id.to_level] - s.energies[id.from_level];
      if (id.photons > 0) freq += id.photons * *opts.omega_r_ghz;
      out.emplace_back(line_label_string(id), freq);
    }
    return out;
  };
}

FluxModel coupled_line_model(const QubitParams& qubit, double omega_r,
                             double g_c, double g_l,
                             const std::vector<LineId>& lines,
                             const CoupledModelOptions& opts) {
  for (const auto& id : lines) {
    if (id.photons >= opts.n_photons)
      throw std::invalid_argument("label photon number beyond truncation");
    if (!id.resonator && id.to_level >= opts.n_qubit_levels)
      throw std::invalid_argument("label qubit level beyond truncation");
  }
  return [qubit, omega_r, g_c, g_l, lines, opts](double phi_ext) {
    CoupledParams cp;
    cp.qubit = qubit;
    cp.qubit.phi_ext = phi_ext;
    cp.omega_r = omega_r;
    cp.g_c = g_c;
    cp.g_l = g_l;
    cp.n_photons = opts.n_photons;
    cp.n_qubit_levels = opts.n_qubit_levels;
    const DressedEigensystem sys = solve_coupled_full(cp);
    const int ground = sys.locate(0, 0).first;
    LineList out;
    out.reserve(lines.size());
    for (const auto& id : lines) {
      const int level = id.resonator ? 0 : id.to_level;
      const int from = id.resonator ? 0 : id.from_level;
      const int to_state = sys.locate(level, id.photons).first;
      const int from_state = from == 0 ? ground : sys.locate(from, 0).first;
      out.emplace_back(line_label_string(id),
                       sys.energies[to_state] - sys.energies[from_state]);
    }
    return out;
  };
}

FitResult fit_qubit_params(const SpectroscopyDataset& dataset,
                           const QubitParams& initial,
                           const QubitFitOptions& opts) {
  dataset.validate();
  initial.validate();
  if (!(initial.e_j > 0.0))
    throw std::invalid_argument(
        "qubit fit optimizes log(E_J); the initial guess must be positive");

  SpectroscopyDataset qubit_data;
  qubit_data.meta = dataset.meta;
  for (const auto& p : dataset.points)
    if (p.kind == LineKind::qubit_line) qubit_data.points.push_back(p);
  if (qubit_data.points.size() < 6)
    throw std::invalid_argument("qubit fit needs at least 6 qubit-line points");
  if (unique_flux(qubit_data).size() < 2)
    throw std::invalid_argument("qubit fit needs at least 2 distinct fluxes");

  const std::vector<LineId> lines = dataset_line_ids(qubit_data);

  QubitModelOptions model_opts;
  model_opts.dim = opts.dim;
  model_opts.omega_r_ghz = opts.omega_r_ghz;

  auto make_objective = [&](int dim) {
    QubitModelOptions mo = model_opts;
    mo.dim = dim;
    return [&qubit_data, lines, mo, initial](const Eigen::VectorXd& x) {
      QubitParams p = initial;
      p.e_l = std::exp(x[0]);
      p.e_c = std::exp(x[1]);
      p.e_j = std::exp(x[2]);
      return objective(qubit_data, qubit_line_model(p, lines, mo));
    };
  };

  const auto objective_fn = make_objective(opts.dim);
  Eigen::VectorXd x0(3);
  x0 << std::log(initial.e_l), std::log(initial.e_c), std::log(initial.e_j);
  NelderMeadOptions nm;
  nm.f_tol = opts.rss_tol;
  nm.max_iterations = opts.max_iterations;
  nm.init_step = opts.init_step;
  FitResult result =
      run_simplex(objective_fn, x0, nm, opts.multi_start, opts.seed);

  const char* names[3] = {"e_l", "e_c", "e_j"};
  const int n_used = static_cast<int>(qubit_data.points.size());
  const double reduced =
      result.rss / std::max(1, n_used - 3);  // residual variance estimate
  Eigen::VectorXd x_best(3);
  for (int i = 0; i < 3; ++i) x_best[i] = result.params[i].value;
  for (int i = 0; i < 3; ++i) {
    const double value = std::exp(x_best[i]);
    const double sigma_log = axis_uncertainty(objective_fn, x_best, i,
                                              result.rss, reduced, 1e-3);
    result.params[i].name = names[i];
    result.params[i].value = value;
    result.params[i].uncertainty =
        std::isfinite(sigma_log) ? value * sigma_log : 0.0;
  }

  QubitParams fitted = initial;
  fitted.e_l = result.params[0].value;
  fitted.e_c = result.params[1].value;
  fitted.e_j = result.params[2].value;
  result.residuals =
      model_residuals(qubit_data, qubit_line_model(fitted, lines, model_opts));

  if (opts.verify_truncation) {
    const auto refit_objective = make_objective(2 * opts.dim);
    NelderMeadOptions refit_nm = nm;
    refit_nm.init_step = 0.02;
    const NelderMeadResult refit = nelder_mead(refit_objective, x_best,
                                               refit_nm);
    result.truncation_ok = true;
    for (int i = 0; i < 3; ++i) {
      const double shift =
          std::abs(std::exp(refit.x[i]) - result.params[i].value) /
          result.params[i].value;
      if (shift > 1e-3) result.truncation_ok = false;
    }
    if (!result.truncation_ok)
      result.message += (result.message.empty() ? "" : "; ") +
                        std::string("parameters moved > 0.1% at doubled "
                                    "basis size");
  }
  return result;
}

FitResult fit_coupling_params(const SpectroscopyDataset& dataset,
                              const QubitParams& qubit, double omega_r_bare,
                              std::pair<double, double> initial_g,
                              const CouplingFitOptions& opts) {
  dataset.validate();
  qubit.validate();
  if (dataset.points.empty())
    throw std::invalid_argument("coupling fit: dataset is empty");
  if (!(omega_r_bare > 0.0))
    throw std::invalid_argument("coupling fit: omega_r must be positive");

  const std::vector<LineId> lines = dataset_line_ids(dataset);
  CoupledModelOptions model_opts;
  model_opts.n_photons = opts.n_photons;
  model_opts.n_qubit_levels = opts.n_qubit_levels;

  const int n_params = opts.fit_omega_r ? 3 : 2;
  auto objective_fn = [&](const Eigen::VectorXd& x) {
    const double omega = opts.fit_omega_r ? x[2] : omega_r_bare;
    if (omega <= 0.0) return kPenalty;
    return objective(dataset, coupled_line_model(qubit, omega, x[0], x[1],
                                                 lines, model_opts));
  };

  Eigen::VectorXd x0(n_params);
  x0[0] = initial_g.first;
  x0[1] = initial_g.second;
  if (opts.fit_omega_r) x0[2] = omega_r_bare;
  NelderMeadOptions nm;
  nm.f_tol = opts.rss_tol;
  nm.max_iterations = opts.max_iterations;
  nm.init_step = opts.init_step_ghz;
  FitResult result =
      run_simplex(objective_fn, x0, nm, opts.multi_start, opts.seed);

  result.degenerate_warning = result.anisotropy > opts.anisotropy_threshold;
  if (result.degenerate_warning)
    result.message += (result.message.empty() ? "" : "; ") +
                      std::string("flat residual valley: couplings and "
                                  "omega_r are not independently resolved");

  const int n_used = static_cast<int>(dataset.points.size());
  const double reduced = result.rss / std::max(1, n_used - n_params);
  Eigen::VectorXd x_best(n_params);
  for (int i = 0; i < n_params; ++i) x_best[i] = result.params[i].value;
  const char* names[3] = {"g_c", "g_l", "omega_r"};
  for (int i = 0; i < n_params; ++i) {
    result.params[i].name = names[i];
    const double sigma = axis_uncertainty(objective_fn, x_best, i, result.rss,
                                          reduced, 1e-4);
    result.params[i].uncertainty = std::isfinite(sigma) ? sigma : 0.0;
  }

  const double omega_fit =
      opts.fit_omega_r ? result.params[2].value : omega_r_bare;
  result.residuals = model_residuals(
      dataset, coupled_line_model(qubit, omega_fit, result.params[0].value,
                                  result.params[1].value, lines, model_opts));
  return result;
}

PipelineResult fit_pipeline(const SpectroscopyDataset& dataset,
                            const QubitParams& initial_qubit,
                            std::pair<double, double> initial_g,
                            double omega_r_bare,
                            const QubitFitOptions& qubit_opts,
                            const CouplingFitOptions& coupling_opts) {
  dataset.validate();
  if (dataset.points.empty())
    throw std::invalid_argument("fit pipeline: dataset is empty");

  PipelineResult pipeline;
  pipeline.qubit_stage = fit_qubit_params(dataset, initial_qubit, qubit_opts);

  QubitParams fitted = initial_qubit;
  fitted.e_l = pipeline.qubit_stage.parameter("e_l");
  fitted.e_c = pipeline.qubit_stage.parameter("e_c");
  fitted.e_j = pipeline.qubit_stage.parameter("e_j");
  pipeline.coupling_stage = fit_coupling_params(
      dataset, fitted, omega_r_bare, initial_g, coupling_opts);
  return pipeline;
}

namespace {

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : r.params) {
    params.push_back({{"name", p.name},
                      {"value", p.value},
                      {"uncertainty", p.uncertainty}});
  }
  return nlohmann::json{{"params", params},
                        {"rss_ghz2", r.rss},
                        {"n_iterations", r.n_iterations},
                        {"converged", r.converged},
                        {"residuals_ghz", r.residuals},
                        {"degenerate_warning", r.degenerate_warning},
                        {"anisotropy", r.anisotropy},
                        {"truncation_ok", r.truncation_ok},
                        {"message", r.message}};
}

}  // namespace

std::string fit_report_json(const FitResult& result) {
  nlohmann::json j = fit_result_to_json(result);
  j["schema_version"] = 1;
  return j.dump(2) + "\n";
}

std::string pipeline_report_json(const PipelineResult& result) {
  nlohmann::json j{{"schema_version", 1},
                   {"qubit_stage", fit_result_to_json(result.qubit_stage)},
                   {"coupling_stage",
                    fit_result_to_json(result.coupling_stage)}};
  return j.dump(2) + "\n";
}

}  // namespace squidfit
