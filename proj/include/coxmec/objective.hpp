#pragma once

#include <Eigen/Core>

#include "coxmec/dataset.hpp"
#include "coxmec/error_model.hpp"
#include "coxmec/ext_real.hpp"
#include "coxmec/spline_hazard.hpp"

namespace coxmec {

/*
 * Corrected log-likelihood contribution of one observation:
 *
 *   q(y, delta, w; lambda, beta)
 *     = delta (log lambda(y) + beta'w)
 *       - (e^{beta'w} / M_U(beta)) * integral_0^y lambda(u) du.
 *
 * Division by M_U undoes the measurement-error inflation in expectation:
 * E[e^{beta'W} | X] = e^{beta'X} M_U(beta).  When lambda(y) = 0 the log
 * term is -inf for delta = 1 and contributes 0 for delta = 0.
 */
ExtReal corrected_term(double y, int delta, const Eigen::VectorXd& w,
                       const SplineHazard& hazard, const Eigen::VectorXd& beta,
                       const ErrorModel& error);

// Sample mean of corrected terms; -inf absorbs.  Empty data is a usage
// error: the objective is undefined without observations.
ExtReal corrected_objective(const Dataset& data, const SplineHazard& hazard,
                            const Eigen::VectorXd& beta, const ErrorModel& error);

} // namespace coxmec
