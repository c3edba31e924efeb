#include "coxmec/objective.hpp"

#include <cmath>

#include "coxmec/errors.hpp"

namespace coxmec {

ExtReal corrected_term(double y, int delta, const Eigen::VectorXd& w,
                       const SplineHazard& hazard, const Eigen::VectorXd& beta,
                       const ErrorModel& error) {
  if (beta.size() != w.size()) throw usage_error("corrected_term: beta/w dimension mismatch");
  const double bw = beta.dot(w);
  const double integral = hazard.cumulative(y);
  const double penalty = std::exp(bw) / error.mgf(beta) * integral;
  if (delta == 1) {
    const double lam = hazard(y);
    if (lam <= 0.0) return ExtReal::neg_inf();
    return ExtReal::finite(std::log(lam) + bw - penalty);
  }
  return ExtReal::finite(-penalty);
}

ExtReal corrected_objective(const Dataset& data, const SplineHazard& hazard,
                            const Eigen::VectorXd& beta, const ErrorModel& error) {
  if (data.size() == 0) throw usage_error("corrected_objective: empty dataset");
  if (data.covariate_dim() != beta.size())
    throw usage_error("corrected_objective: beta dimension does not match data");
  ExtReal sum = ExtReal::finite(0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += corrected_term(data.y[i], data.delta[i],
                          data.w.row(static_cast<Eigen::Index>(i)).transpose(), hazard, beta,
                          error);
    if (sum.is_neg_inf()) return sum; // absorbed; remaining terms cannot recover
  }
  return sum.scaled(1.0 / static_cast<double>(data.size()));
}

} // namespace coxmec
