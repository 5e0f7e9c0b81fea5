#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

// Deterministic Nelder-Mead simplex minimizer with the adaptive coefficients
// of Gao & Han (alpha 1, beta 1 + 2/n, gamma 0.75 - 1/2n, delta 1 - 1/n).
// No randomness anywhere; identical inputs give identical iterates.

namespace squidfit {

struct NelderMeadOptions {
  double f_tol = 1e-7;     // spread of simplex values at convergence
  int max_iterations = 10000;
  double init_step = 0.15;  // absolute per-coordinate displacement
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::MatrixXd final_simplex;   // (dim) x (dim+1), vertices as columns
  Eigen::VectorXd final_values;    // dim+1
  std::vector<double> best_history;  // best vertex value after each iteration
};

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& opts = {});

// Ratio of largest to smallest singular value of the centered final simplex;
// large values flag a flat valley (parameter degeneracy) at the optimum.
double simplex_anisotropy(const NelderMeadResult& result);

}  // namespace squidfit
