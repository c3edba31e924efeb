#include "coxmec/param_box.hpp"

#include <cmath>

namespace coxmec {

ParamBox::ParamBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() == 0) throw usage_error("ParamBox: empty bounds");
  if (lower.size() != upper.size()) throw usage_error("ParamBox: bound dimensions differ");
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))
      throw usage_error("ParamBox: bounds must be finite");
    if (lower[j] > upper[j]) throw usage_error("ParamBox: lower bound exceeds upper bound");
  }
}

bool ParamBox::contains(const Eigen::VectorXd& b, double tol) const {
  if (b.size() != dim()) return false;
  for (Eigen::Index j = 0; j < dim(); ++j)
    if (b[j] < lower[j] - tol || b[j] > upper[j] + tol) return false;
  return true;
}

Eigen::VectorXd ParamBox::clip(const Eigen::VectorXd& b) const {
  if (b.size() != dim()) throw usage_error("ParamBox::clip: dimension mismatch");
  return b.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd ParamBox::corner(unsigned mask) const {
  Eigen::VectorXd c(dim());
  for (Eigen::Index j = 0; j < dim(); ++j)
    c[j] = (mask >> j) & 1u ? upper[j] : lower[j];
  return c;
}

} // namespace coxmec
