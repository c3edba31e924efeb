#pragma once

#include <functional>

#include <Eigen/Core>

#include "coxmec/param_box.hpp"

namespace coxmec {

struct NelderMeadConfig {
  int max_evals = 200;
  double x_tol = 1e-8;  // simplex diameter relative to the best vertex
  double f_tol = 1e-10; // objective spread relative to the best value
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Derivative-free simplex maximization over a box.  Every candidate is
// clipped into the box before evaluation, so degenerate coordinates stay
// pinned.  Standard reflection/expansion/contraction/shrink coefficients
// (1, 2, 1/2, 1/2).
NelderMeadResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& start, const ParamBox& box,
                                      const NelderMeadConfig& config);

} // namespace coxmec
