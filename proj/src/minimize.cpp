#include "thinfilm/minimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace thinfilm {

const char* to_string(MinimizeStatus status) {
  switch (status) {
    case MinimizeStatus::Converged: return "converged";
    case MinimizeStatus::MaxIterations: return "max-iterations";
    case MinimizeStatus::LineSearchFailed: return "line-search-failed";
  }
  return "unknown";
}

MinimizeResult lbfgs(const Objective& objective, Eigen::VectorXd x0, const MinimizeOptions& options) {
  MinimizeResult result;
  const Eigen::Index n = x0.size();
  result.x = std::move(x0);
  if (n == 0) {
    Eigen::VectorXd g;
    result.value = objective(result.x, g);
    result.status = MinimizeStatus::Converged;
    return result;
  }

  Eigen::VectorXd g(n);
  double f = objective(result.x, g);
  if (options.record_log) result.log.push_back(f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd direction(n), x_trial(n), g_trial(n);
  std::vector<double> alpha(options.history);

  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= options.grad_tol) {
      result.status = MinimizeStatus::Converged;
      break;
    }

    // Two-loop recursion.
    direction = -g;
    const int m = static_cast<int>(s_hist.size());
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(direction);
      direction -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      direction *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      direction *= 1.0 / std::max(1.0, g.norm());
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(direction);
      direction += (alpha[i] - beta) * s_hist[i];
    }

    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -g / std::max(1.0, g.norm());
      slope = g.dot(direction);
    }

    double step = 1.0;
    double f_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_trial = result.x + step * direction;
      f_trial = objective(x_trial, g_trial);
      if (std::isfinite(f_trial) && f_trial <= f + 1e-4 * step * slope && f_trial < f) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Retry once from steepest descent before giving up.
      if (m > 0) {
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      result.status = MinimizeStatus::LineSearchFailed;
      break;
    }

    Eigen::VectorXd s = x_trial - result.x;
    Eigen::VectorXd y = g_trial - g;
    const double sy = s.dot(y);
    result.x.swap(x_trial);
    g.swap(g_trial);
    f = f_trial;
    if (options.record_log) result.log.push_back(f);

    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
  }

  if (iter >= options.max_iter) {
    result.status = g.lpNorm<Eigen::Infinity>() <= options.grad_tol ? MinimizeStatus::Converged
                                                                     : MinimizeStatus::MaxIterations;
  }
  result.iterations = iter;
  result.value = f;
  result.grad_norm = g.lpNorm<Eigen::Infinity>();
  return result;
}

}  // namespace thinfilm
