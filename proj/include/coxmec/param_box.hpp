#pragma once

#include <Eigen/Core>

#include "coxmec/errors.hpp"

namespace coxmec {

// Compact box for the regression parameter.  A degenerate box
// (lower == upper in every coordinate) pins beta and reduces fitting to
// the hazard profile alone.
struct ParamBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  ParamBox() = default;
  ParamBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::VectorXd& b, double tol = 0.0) const;
  Eigen::VectorXd clip(const Eigen::VectorXd& b) const;
  Eigen::VectorXd midpoint() const { return 0.5 * (lower + upper); }
  bool degenerate() const { return (upper - lower).lpNorm<Eigen::Infinity>() == 0.0; }

  // Corner with coordinate pattern given by the bits of mask.
  Eigen::VectorXd corner(unsigned mask) const;
};

} // namespace coxmec
