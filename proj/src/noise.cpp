#include "squidfit/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "squidfit/constants.hpp"
#include "squidfit/neldermead.hpp"

namespace squidfit {

namespace {

double parse_field(const std::string& s, const char* what, int line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("line " + std::to_string(line_no) + ": bad " +
                             std::string(what));
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

void T1Model::validate() const {
  if (!(q_diel > 0.0))
    throw std::invalid_argument("T1Model: q_diel must be positive");
  if (!(temperature_k > 0.0))
    throw std::invalid_argument(
        "T1Model: temperature must be supplied and positive");
  if (c_total_ff && !(*c_total_ff > 0.0))
    throw std::invalid_argument("T1Model: c_total must be positive");
}

double T1Model::capacitance_ff(const QubitParams& qubit) const {
  if (c_total_ff) return *c_total_ff;
  return constants::capacitance_ff_from_ec_ghz(qubit.e_c);
}

double t1_capacitive_us(const QubitParams& qubit, double phi_ext,
                        const T1Model& model, int dim) {
  model.validate();
  QubitParams at = qubit;
  at.phi_ext = phi_ext;
  const SpectrumResult s = diagonalize(at, dim);
  const double f01 = s.transition(0, 1);
  const double phi01 = matrix_element(at, QubitOperator::phi, 0, 1, dim);
  if (phi01 * phi01 < 1e-24)
    return std::numeric_limits<double>::infinity();

  const double omega = constants::two_pi * f01 * 1e9;  // rad/s
  const double c_farad = model.capacitance_ff(at) * 1e-15;
  const double two_e = 2.0 * constants::elementary_charge;
  const double thermal =
      1.0 / std::tanh(constants::hbar * omega /
                      (2.0 * constants::boltzmann_k * model.temperature_k));
  const double gamma1 = phi01 * phi01 * constants::hbar * omega * omega *
                        c_farad / (two_e * two_e * model.q_diel) * thermal;
  return 1.0 / gamma1 * 1e6;
}

void T2Model::validate() const {
  if (a_phi_sqrt_uphi0 < 0.0)
    throw std::invalid_argument("T2Model: sqrt(A_Phi) must be >= 0");
  if (!(t_phi_us > 0.0))
    throw std::invalid_argument("T2Model: t_phi must be positive");
}

double f01_flux_slope(const QubitParams& qubit, double phi_ext, int dim,
                      double step) {
  auto f01 = [&](double f) {
    QubitParams p = qubit;
    p.phi_ext = f;
    const SpectrumResult s = diagonalize(p, dim);
    return s.transition(0, 1);
  };
  const double d1 = (f01(phi_ext + step) - f01(phi_ext - step)) / (2.0 * step);
  const double d2 =
      (f01(phi_ext + 2.0 * step) - f01(phi_ext - 2.0 * step)) / (4.0 * step);
  const double richardson = (4.0 * d1 - d2) / 3.0;
  // Richardson sanity: the h and 2h estimates must agree at the percent
  // level away from machine noise.
  const double scale = std::max(std::abs(richardson), 1e-6);
  if (std::abs(d1 - d2) > 0.05 * scale + 1e-6)
    throw std::runtime_error("flux derivative not converged; refine step");
  return std::abs(richardson);
}

double t2_echo_us(const QubitParams& qubit, double phi_ext,
                  const T2Model& model, double t1_us, int dim) {
  model.validate();
  if (!(t1_us > 0.0))
    throw std::invalid_argument("t2_echo: t1 must be positive");
  const double slope_ghz = f01_flux_slope(qubit, phi_ext, dim);
  // |dw/dPhi| sqrt(A) gamma: GHz/Phi0 -> rad/s, sqrt(A) in Phi0.
  const double gamma_flux_per_s = constants::two_pi * slope_ghz * 1e9 *
                                  model.a_phi_sqrt_uphi0 * 1e-6 *
                                  model.gamma_filter;
  const double gamma_total_per_us =
      gamma_flux_per_s * 1e-6 + 0.5 / t1_us + 1.0 / model.t_phi_us;
  return 1.0 / gamma_total_per_us;
}

double t2_echo_model_us(const QubitParams& qubit, double phi_ext,
                        const T2Model& model, double t1_us, int dim) {
  return std::min(2.0 * t1_us,
                  t2_echo_us(qubit, phi_ext, model, t1_us, dim));
}

std::vector<TimePoint> read_time_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open time dataset: " + path);
  std::vector<TimePoint> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("phi_ext", 0) == 0) continue;
    const auto fields = split_line(line);
    if (fields.size() != 3)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected phi_ext,value_us,err_us");
    TimePoint p;
    p.phi_ext = parse_field(fields[0], "phi_ext", line_no);
    p.value_us = parse_field(fields[1], "value_us", line_no);
    p.err_us = parse_field(fields[2], "err_us", line_no);
    pts.push_back(p);
  }
  return pts;
}

void write_time_csv(const std::string& path, std::span<const TimePoint> pts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write time dataset: " + path);
  out << "phi_ext,value_us,err_us\n";
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.phi_ext, p.value_us,
                  p.err_us);
    out << buf;
  }
}

T1FitResult fit_t1_quality(std::span<const TimePoint> data,
                           const QubitParams& qubit, double temperature_k,
                           std::optional<double> c_total_ff, int dim) {
  if (data.empty())
    throw std::invalid_argument("t1 fit: no data points");
  for (const auto& p : data)
    if (!(p.value_us > 0.0))
      throw std::invalid_argument("t1 fit: non-positive T1 value");

  // T1 = Q * t1_unit(flux), so log T1 - log t1_unit averages to log Q.
  T1Model unit;
  unit.q_diel = 1.0;
  unit.temperature_k = temperature_k;
  unit.c_total_ff = c_total_ff;

  double acc = 0.0;
  std::vector<double> logs(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    const double t1_unit =
        t1_capacitive_us(qubit, data[i].phi_ext, unit, dim);
    logs[i] = std::log(data[i].value_us) - std::log(t1_unit);
    acc += logs[i];
  }
  const double mean = acc / data.size();

  T1FitResult fit;
  fit.n_points = static_cast<int>(data.size());
  fit.q_diel = std::exp(mean);
  double rss = 0.0;
  for (double l : logs) rss += (l - mean) * (l - mean);
  fit.rss_log = rss;
  const double sigma =
      data.size() > 1 ? std::sqrt(rss / (data.size() - 1) / data.size()) : 0.0;
  fit.q_diel_uncertainty = fit.q_diel * sigma;
  return fit;
}

T2FitResult fit_t2_flux_noise(std::span<const TimePoint> data,
                              const QubitParams& qubit, const T1Interp& t1_us,
                              const T2FitOptions& opts) {
  if (data.size() < 3)
    throw std::invalid_argument("t2 fit: need at least 3 points");
  double min_flux = data.front().phi_ext, max_flux = data.front().phi_ext;
  double mean_flux = 0.0;
  for (const auto& p : data) {
    if (!(p.value_us > 0.0))
      throw std::invalid_argument("t2 fit: non-positive T2 value");
    min_flux = std::min(min_flux, p.phi_ext);
    max_flux = std::max(max_flux, p.phi_ext);
    mean_flux += p.phi_ext / data.size();
  }
  const double sweet = std::round(2.0 * mean_flux) / 2.0;
  if (!(min_flux <= sweet && sweet <= max_flux))
    throw std::invalid_argument("t2 fit: data must bracket a sweet spot");

  // Slopes and T1 values are fixed per point; only the model parameters move.
  std::vector<double> slopes(data.size()), t1(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    slopes[i] = f01_flux_slope(qubit, data[i].phi_ext, opts.dim);
    t1[i] = t1_us(data[i].phi_ext);
  }

  auto model_t2 = [&](double sqrt_a_uphi0, double t_phi, size_t i) {
    const double gamma_flux = constants::two_pi * slopes[i] * 1e9 *
                              sqrt_a_uphi0 * 1e-6 * opts.gamma_filter * 1e-6;
    const double rate = gamma_flux + 0.5 / t1[i] + 1.0 / t_phi;
    return std::min(2.0 * t1[i], 1.0 / rate);
  };

  double init_a = 500.0, init_tphi = 20.0;
  if (opts.initial) {
    init_a = opts.initial->first;
    init_tphi = opts.initial->second;
  }
  auto objective_fn = [&](const Eigen::VectorXd& x) {
    const double sqrt_a = std::exp(x[0]);
    const double t_phi = std::exp(x[1]);
    double rss = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double r =
          std::log(data[i].value_us) - std::log(model_t2(sqrt_a, t_phi, i));
      rss += r * r;
    }
    return std::isfinite(rss) ? rss : 1e12;
  };

  Eigen::VectorXd x0(2);
  x0 << std::log(init_a), std::log(init_tphi);
  NelderMeadOptions nm;
  nm.f_tol = opts.rss_tol;
  nm.max_iterations = opts.max_iterations;
  nm.init_step = 0.3;
  const NelderMeadResult r = nelder_mead(objective_fn, x0, nm);

  T2FitResult fit;
  fit.a_phi_sqrt_uphi0 = std::exp(r.x[0]);
  fit.t_phi_us = std::exp(r.x[1]);
  fit.rss = r.f;
  fit.n_iterations = r.iterations;
  fit.converged = r.converged;

  // curvature-based uncertainties in log space
  auto curvature = [&](int axis) {
    const double h = 1e-3;
    Eigen::VectorXd hi = r.x, lo = r.x;
    hi[axis] += h;
    lo[axis] -= h;
    return (objective_fn(hi) - 2.0 * r.f + objective_fn(lo)) / (h * h);
  };
  const double reduced = r.f / std::max<size_t>(1, data.size() - 2);
  for (int axis = 0; axis < 2; ++axis) {
    const double c = curvature(axis);
    double sigma_log = std::numeric_limits<double>::infinity();
    if (c > 0.0) sigma_log = std::sqrt(2.0 * reduced / c);
    const double value = axis == 0 ? fit.a_phi_sqrt_uphi0 : fit.t_phi_us;
    const double sigma =
        std::isfinite(sigma_log) ? value * sigma_log : value * 10.0;
    if (axis == 0)
      fit.a_phi_uncertainty = sigma;
    else
      fit.t_phi_uncertainty = sigma;
    if (!std::isfinite(sigma_log) || sigma_log > 1.0)
      fit.wide_uncertainty = true;
  }
  return fit;
}

// ---------------------------------------------------------------------------

void NumberSplitModel::validate() const {
  if (n_bar < 0.0)
    throw std::invalid_argument("NumberSplitModel: n_bar must be >= 0");
  if (!(linewidth_mhz > 0.0))
    throw std::invalid_argument("NumberSplitModel: linewidth must be > 0");
}

Eigen::VectorXd number_split_lineshape(std::span<const double> freq_ghz,
                                       const NumberSplitModel& model) {
  model.validate();
  // Poisson weights down to 1e-6 of the maximal weight.
  std::vector<double> weights;
  double w = std::exp(-model.n_bar);  // k = 0
  double w_max = w;
  weights.push_back(w);
  for (int k = 1; k < 200; ++k) {
    w *= model.n_bar / k;
    w_max = std::max(w_max, w);
    if (w < 1e-6 * w_max && k > model.n_bar) break;
    weights.push_back(w);
  }

  const double half_ghz = 0.5 * model.linewidth_mhz * 1e-3;
  const double spacing_ghz = model.two_chi_mhz * 1e-3;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(freq_ghz.size());
  for (size_t i = 0; i < freq_ghz.size(); ++i) {
    double acc = 0.0;
    for (size_t k = 0; k < weights.size(); ++k) {
      const double df = freq_ghz[i] - (model.f0_ghz + k * spacing_ghz);
      acc += weights[k] * half_ghz * half_ghz /
             (df * df + half_ghz * half_ghz);
    }
    out[i] = model.amplitude * acc;
  }
  return out;
}

std::vector<TracePoint> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  std::vector<TracePoint> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("freq_ghz", 0) == 0) continue;
    const auto fields = split_line(line);
    if (fields.size() != 2)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected freq_ghz,amplitude");
    TracePoint p;
    p.freq_ghz = parse_field(fields[0], "freq_ghz", line_no);
    p.amplitude = parse_field(fields[1], "amplitude", line_no);
    pts.push_back(p);
  }
  return pts;
}

namespace {

NumberSplitModel heuristic_seed(std::span<const TracePoint> trace) {
  // Tallest sample is the zero-photon peak; the strongest local maximum at
  // least two samples away seeds the spacing.
  size_t top = 0;
  for (size_t i = 0; i < trace.size(); ++i)
    if (trace[i].amplitude > trace[top].amplitude) top = i;

  NumberSplitModel seed;
  seed.f0_ghz = trace[top].freq_ghz;
  seed.amplitude = trace[top].amplitude;
  seed.n_bar = 0.5;

  double best_second = -1.0;
  size_t second = top;
  for (size_t i = 1; i + 1 < trace.size(); ++i) {
    if (i == top) continue;
    if (trace[i].amplitude <= trace[i - 1].amplitude ||
        trace[i].amplitude <= trace[i + 1].amplitude)
      continue;
    if (std::abs(static_cast<long>(i) - static_cast<long>(top)) < 3) continue;
    if (trace[i].amplitude > best_second) {
      best_second = trace[i].amplitude;
      second = i;
    }
  }
  const double span =
      trace.back().freq_ghz - trace.front().freq_ghz;
  seed.two_chi_mhz = second != top
                         ? (trace[second].freq_ghz - seed.f0_ghz) * 1e3
                         : 0.1 * span * 1e3;
  seed.linewidth_mhz = std::max(0.2 * std::abs(seed.two_chi_mhz),
                                span * 1e3 / trace.size());
  return seed;
}

}  // namespace

NumberSplitFit fit_number_splitting_trace(std::span<const TracePoint> trace,
                                          const NumberSplitFitOptions& opts) {
  if (trace.size() < 8)
    throw std::invalid_argument("number splitting fit: trace too short");
  const NumberSplitModel seed =
      opts.initial ? *opts.initial : heuristic_seed(trace);

  std::vector<double> freqs(trace.size());
  double amp_scale = 0.0;
  for (size_t i = 0; i < trace.size(); ++i) {
    freqs[i] = trace[i].freq_ghz;
    amp_scale = std::max(amp_scale, std::abs(trace[i].amplitude));
  }
  if (!(amp_scale > 0.0))
    throw std::invalid_argument("number splitting fit: empty trace");

  // x = (log n_bar, two_chi MHz, log linewidth MHz, f0 GHz, log amplitude)
  auto unpack = [](const Eigen::VectorXd& x) {
    NumberSplitModel m;
    m.n_bar = std::exp(x[0]);
    m.two_chi_mhz = x[1];
    m.linewidth_mhz = std::exp(x[2]);
    m.f0_ghz = x[3];
    m.amplitude = std::exp(x[4]);
    return m;
  };
  auto objective_fn = [&](const Eigen::VectorXd& x) {
    const NumberSplitModel m = unpack(x);
    const Eigen::VectorXd s = number_split_lineshape(freqs, m);
    double rss = 0.0;
    for (size_t i = 0; i < trace.size(); ++i) {
      const double r = (s[i] - trace[i].amplitude) / amp_scale;
      rss += r * r;
    }
    return std::isfinite(rss) ? rss : 1e12;
  };

  Eigen::VectorXd x0(5);
  x0 << std::log(std::max(seed.n_bar, 1e-3)), seed.two_chi_mhz,
      std::log(seed.linewidth_mhz), seed.f0_ghz,
      std::log(std::max(seed.amplitude, 1e-12));
  NelderMeadOptions nm;
  nm.f_tol = opts.rss_tol;
  nm.max_iterations = opts.max_iterations;
  nm.init_step = 0.08;
  const NelderMeadResult r = nelder_mead(objective_fn, x0, nm);

  NumberSplitFit fit;
  fit.model = unpack(r.x);
  fit.rss = r.f;
  fit.n_iterations = r.iterations;
  fit.converged = r.converged;
  fit.low_confidence =
      std::abs(fit.model.two_chi_mhz) < fit.model.linewidth_mhz;
  return fit;
}

std::vector<NumberSplitFit> fit_number_splitting(
    std::span<const std::vector<TracePoint>> traces,
    const NumberSplitFitOptions& opts) {
  if (traces.empty())
    throw std::invalid_argument("number splitting fit: no traces");
  std::vector<NumberSplitFit> fits;
  fits.reserve(traces.size());
  for (const auto& t : traces)
    fits.push_back(fit_number_splitting_trace(t, opts));
  return fits;
}

}  // namespace squidfit
