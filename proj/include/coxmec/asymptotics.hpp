#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "coxmec/truth.hpp"

namespace coxmec {

/*
 * Population quantities behind the two CLTs, computed under a known
 * truth.  With G_T(t|X) = exp(-e^{beta0'X} Lambda_0(t)) and G_C the
 * censor survival,
 *
 *   a(t) = E[ X e^{beta0'X} G_T(t|X) ]          (vector)
 *   b(t) = E[   e^{beta0'X} G_T(t|X) ]          (scalar, positive)
 *   p(t) = E[ XX' e^{beta0'X} G_T(t|X) ]        (matrix)
 *   T(t) = p(t) b(t) - a(t) a'(t),  K(t) = lambda_0(t) / b(t)
 *
 *   A = E[ XX' e^{beta0'X} integral_0^Y lambda_0 ]
 *     = integral_0^tau p(u) lambda_0(u) G_C(u) du
 *   M = integral_0^tau T(u) K(u) G_C(u) du.
 *
 * X-expectations are the covariate law's node sums; time integrals are
 * composite Simpson on the stored uniform grid.  At u = tau the censor
 * survival is taken as its left limit P(C >= tau), the value consistent
 * with integration when C has an atom there.
 */
struct AsymptoticTables {
  std::vector<double> grid; // uniform on [0, tau], odd node count
  std::vector<double> lambda0;
  std::vector<double> gc; // censor survival, left limit at tau
  std::vector<double> b;
  std::vector<double> K;
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::MatrixXd> p;
  std::vector<Eigen::MatrixXd> T;
  Eigen::MatrixXd A;
  Eigen::MatrixXd M;
};

// Tabulates everything above.  grid_nodes must be odd and >= 3; the
// default resolves the integrals to well below the Monte Carlo noise of
// everything they are compared against.  Throws numeric_error if b(t)
// degenerates (underflow to 0 or non-finite) at some grid point.
AsymptoticTables compute_tables(const Truth& truth, std::size_t grid_nodes = 2001);

// The integrals above recomputed from stored grid functions.
Eigen::MatrixXd matrix_A_from(const AsymptoticTables& tables);
Eigen::MatrixXd matrix_M_from(const AsymptoticTables& tables);

// Monte Carlo check of A: average of XX' e^{beta0'X} Lambda_0(Y) over
// fresh draws; agrees with the quadrature value up to MC error.
Eigen::MatrixXd matrix_A_mc(const Truth& truth, int reps, std::uint64_t seed);

/*
 * Covariance target of the parameter CLT: Sigma_beta = Cov(zeta) with
 *
 *   zeta = -Delta a(Y)/b(Y) + (e^{beta0'W}/M_U(beta0)) integral_0^Y a K du
 *          + dq/dbeta(Y, Delta, W; lambda_0, beta_0),
 *
 *   dq/dbeta = Delta W - (M_U(beta) W - E[U e^{beta'U}]) / M_U(beta)^2
 *              * e^{beta'W} integral_0^Y lambda du.
 *
 * zeta is the score of the profiled population objective and -M is that
 * objective's Hessian at the truth, so the pair enters the sandwich
 * M^{-1} Sigma_beta M^{-1} with no additional scale factor.
 *
 * Estimated by Monte Carlo over reps draws (reps >= 10^4 enforced), one
 * RNG substream per draw so the result is independent of scheduling.
 */
Eigen::MatrixXd sigma_beta(const Truth& truth, const AsymptoticTables& tables, int reps,
                           std::uint64_t seed);

// M^{-1} Sigma M^{-1}, symmetrized; the asymptotic covariance of
// sqrt(n) (beta_hat - beta0).  Throws numeric_error when M is singular,
// which signals a degenerate fixture rather than a numerical accident.
Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& M, const Eigen::MatrixXd& sigma);

/*
 * Solution of the linear integral equation tying a hazard perturbation
 * direction phi_lambda to a weight function f:
 *
 *   phi_lambda(u)/K(u) - a'(u) A^{-1} m(phi_lambda) = f(u),
 *   m(phi) = integral_0^tau phi(u) a(u) G_C(u) du,
 *
 * whose finite-rank structure gives phi_lambda = K (f + a'c) with
 * (A - S) c = v, S = integral K a a' G_C du, v = integral K f a G_C du,
 * and phi_beta = -A^{-1} m(phi_lambda) = -c.  sigma_sq is the CLT
 * variance for sqrt(n) integral (lambda_hat - lambda_0) f G_C du:
 *
 *   sigma_sq = Var[ Delta phi_lambda(Y)/lambda_0(Y)
 *                   - (e^{beta0'W}/M_U) integral_0^Y phi_lambda du
 *                   + Delta phi_beta'W
 *                   - phi_beta' (M_U W - E[U e^{beta0'U}]) / M_U^2
 *                     * e^{beta0'W} integral_0^Y lambda_0 du ],
 *
 * the variance of the objective's directional derivative at the truth
 * along (phi_lambda, phi_beta), estimated by Monte Carlo like
 * sigma_beta.
 */
struct FredholmSolution {
  std::vector<double> phi_lambda; // on tables.grid
  Eigen::VectorXd phi_beta;
  Eigen::VectorXd m_phi;
  double sigma_sq = 0.0;
};

// f is tabulated on tables.grid (linear interpolation off the grid).
// Throws numeric_error if A or A - S is singular.
FredholmSolution solve_fredholm(const std::vector<double>& f, const Truth& truth,
                                const AsymptoticTables& tables, int reps,
                                std::uint64_t seed);

// Sup-norm over the grid of phi/K - a' A^{-1} m(phi) - f, with m(phi)
// recomputed by Simpson from the supplied values; the self-check that
// the returned phi_lambda actually solves the equation.
double fredholm_residual(const std::vector<double>& f, const std::vector<double>& phi_lambda,
                         const AsymptoticTables& tables);

} // namespace coxmec
