#include "squidfit/neldermead.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace squidfit {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& opts) {
  const int n = static_cast<int>(start.size());
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 0.5 / n;
  const double delta = 1.0 - 1.0 / n;

  std::vector<Eigen::VectorXd> x(n + 1, start);
  std::vector<double> f(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1][i] += opts.init_step;
  for (int i = 0; i <= n; ++i) f[i] = objective(x[i]);

  std::vector<int> order(n + 1);
  std::iota(order.begin(), order.end(), 0);
  auto sort_vertices = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f[a] < f[b]; });
  };

  std::vector<double> best_history;
  best_history.reserve(256);
  int iter = 0;
  bool converged = false;
  for (; iter < opts.max_iterations; ++iter) {
    sort_vertices();
    best_history.push_back(f[order[0]]);
    if (f[order[n]] - f[order[0]] < opts.f_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += x[order[i]];
    centroid /= n;
    const int worst = order[n];

    const Eigen::VectorXd reflected = centroid + alpha * (centroid - x[worst]);
    const double f_r = objective(reflected);

    if (f_r < f[order[0]]) {
      const Eigen::VectorXd expanded = centroid + beta * (reflected - centroid);
      const double f_e = objective(expanded);
      if (f_e < f_r) {
        x[worst] = expanded;
        f[worst] = f_e;
      } else {
        x[worst] = reflected;
        f[worst] = f_r;
      }
      continue;
    }
    if (f_r < f[order[n - 1]]) {
      x[worst] = reflected;
      f[worst] = f_r;
      continue;
    }

    // contraction, outside or inside depending on the reflected value
    if (f_r < f[worst]) {
      const Eigen::VectorXd contracted =
          centroid + gamma * (reflected - centroid);
      const double f_c = objective(contracted);
      if (f_c <= f_r) {
        x[worst] = contracted;
        f[worst] = f_c;
        continue;
      }
    } else {
      const Eigen::VectorXd contracted =
          centroid - gamma * (centroid - x[worst]);
      const double f_c = objective(contracted);
      if (f_c < f[worst]) {
        x[worst] = contracted;
        f[worst] = f_c;
        continue;
      }
    }

    // shrink toward the best vertex
    for (int i = 1; i <= n; ++i) {
      const int v = order[i];
      x[v] = x[order[0]] + delta * (x[v] - x[order[0]]);
      f[v] = objective(x[v]);
    }
  }

  sort_vertices();
  NelderMeadResult result;
  result.x = x[order[0]];
  result.f = f[order[0]];
  result.iterations = iter;
  result.converged = converged;
  result.best_history = std::move(best_history);
  result.final_simplex.resize(n, n + 1);
  result.final_values.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    result.final_simplex.col(i) = x[order[i]];
    result.final_values[i] = f[order[i]];
  }
  return result;
}

double simplex_anisotropy(const NelderMeadResult& result) {
  const int n = static_cast<int>(result.final_simplex.rows());
  const Eigen::VectorXd centroid = result.final_simplex.rowwise().mean();
  Eigen::MatrixXd centered = result.final_simplex;
  centered.colwise() -= centroid;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto& sv = svd.singularValues();
  const double smallest = sv[n - 1];
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smallest;
}

}  // namespace squidfit
