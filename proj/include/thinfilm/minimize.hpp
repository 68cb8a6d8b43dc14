#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace thinfilm {

/// Objective callback: returns f(x) and writes ∇f(x) into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct MinimizeOptions {
  double grad_tol = 1e-8;  // on the max-norm of the gradient
  int max_iter = 500;
  int history = 8;
  bool record_log = false;
};

enum class MinimizeStatus { Converged, MaxIterations, LineSearchFailed };

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  MinimizeStatus status = MinimizeStatus::MaxIterations;
  std::vector<double> log;  // objective value after every accepted step
};

/// Limited-memory BFGS with Armijo backtracking. Every accepted step strictly
/// lowers the objective, so the returned value never exceeds f(x0).
MinimizeResult lbfgs(const Objective& objective, Eigen::VectorXd x0, const MinimizeOptions& options = {});

const char* to_string(MinimizeStatus status);

}  // namespace thinfilm
