#pragma once

#include <vector>

#include <Eigen/Core>

#include "coxmec/error_model.hpp"
#include "coxmec/param_box.hpp"
#include "coxmec/rng.hpp"
#include "coxmec/spline_hazard.hpp"

namespace coxmec {

/*
 * Law of the true covariate X.  Finite-support and gaussian variants
 * share one integration interface: a list of nodes x_j (rows) with
 * weights w_j summing to 1 such that E f(X) = sum_j w_j f(x_j).  The
 * identity is exact for finite support; for the gaussian it is a tensor
 * Gauss-Hermite rule (nodes_per_dim points per dimension), exact for
 * polynomials of degree < 2 nodes_per_dim and rapidly convergent for the
 * exponential-times-survival integrands used here.  Gaussian laws are
 * limited to dimension <= 2; use finite support beyond that (the tensor
 * rule grows exponentially).
 */
class CovariateLaw {
public:
  enum class Kind { FiniteSupport, Gaussian };

  static CovariateLaw finite_support(const Eigen::MatrixXd& atoms, // rows are atoms
                                     const std::vector<double>& probs);
  static CovariateLaw gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                               int nodes_per_dim = 40);
  // The scalar uniform law on {-1, 0, 1}.
  static CovariateLaw uniform_three_point();

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return nodes_.cols(); }
  const Eigen::MatrixXd& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

  Eigen::VectorXd sample(Rng& rng) const;

private:
  CovariateLaw() = default;

  Kind kind_ = Kind::FiniteSupport;
  Eigen::MatrixXd nodes_;       // integration nodes, one per row
  std::vector<double> weights_; // nonnegative, sum 1
  Eigen::VectorXd mean_;        // gaussian parameters
  Eigen::MatrixXd chol_;        // lower factor of the gaussian covariance
};

/*
 * Law of the censoring time C on [0, tau]: a uniform component on
 * [lo, hi] with weight 1 - atom_weight plus a point mass at tau with
 * weight atom_weight.  atom_weight = 1 is the degenerate C = tau.
 * The interval is stored as given; Truth::validate checks it against
 * tau.  Survival is P(C > t); survival_left is P(C >= t), which differs
 * only at the atom and is the value quadrature should use at t = tau.
 */
class CensorLaw {
public:
  static CensorLaw at_tau();
  static CensorLaw uniform_mix(double lo, double hi, double atom_weight);

  double atom_weight() const { return atom_; }
  double uniform_lo() const { return lo_; }
  double uniform_hi() const { return hi_; }

  double survival(double t, double tau) const;
  double survival_left(double t, double tau) const;
  double sample(Rng& rng, double tau) const;

private:
  CensorLaw(double lo, double hi, double atom) : lo_(lo), hi_(hi), atom_(atom) {}

  double lo_ = 0.0, hi_ = 0.0;
  double atom_ = 1.0;
};

/*
 * Complete data-generating truth: baseline hazard lambda_0, regression
 * parameter beta_0, and the laws of X, C and U.  All population-level
 * quantities of the asymptotic theory are computed from this object, and
 * the simulation module draws datasets from it.
 */
struct Truth {
  SplineHazard hazard0;
  Eigen::VectorXd beta0;
  CovariateLaw x_law;
  CensorLaw censor;
  ErrorModel error;

  double tau() const { return hazard0.tau(); }
  Eigen::Index dim() const { return beta0.size(); }

  // P(T > t | X = x) = exp(-e^{beta0'x} Lambda_0(t)).
  double lifetime_survival(double t, const Eigen::VectorXd& x) const;

  /*
   * Checks the model conditions that are decidable from the truth alone
   * and throws usage_error naming each violated condition by its label
   * (the labels are documented in the README):
   *   (v)   censoring supported in [0, tau]
   *   (vi)  covariate covariance positive definite
   *   (vii) lambda_0 positive on [0, tau]
   *   (ix)  lambda_0 strictly inside the Lipschitz cone
   *   (x)   P(C > 0) = 1
   * Dimension agreement between beta0, the covariate law and the error
   * model is checked as well.
   */
  void validate() const;

  // Condition (viii): beta0 interior to the search box.
  void check_interior(const ParamBox& box) const;

  // The standard study fixture: tau = 1, lambda_0(t) = 0.5 + 0.4 t,
  // beta_0 = 0.7, X uniform on {-1, 0, 1}, C a 0.2/0.8 mix of the point
  // mass at tau and U[0.2, 1], gaussian error with sigma = 0.3.
  static Truth default_fixture();
};

// One latent draw: the observables (y, delta, w) plus the latent pieces
// behind them.  lifetime is +infinity when the event lies beyond the
// reach of the cumulative hazard on [0, tau].
struct TruthRecord {
  double y = 0.0;
  int delta = 0;
  Eigen::VectorXd w;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double lifetime = 0.0;
  double censor = 0.0;
};

// Draws (X, E, C, U) in that fixed order and assembles the record:
// T = Lambda_0^{-1}(E e^{-beta0'X}), Y = min(T, C), Delta = I(T <= C),
// W = X + U.
TruthRecord sample_record(const Truth& truth, Rng& rng);

} // namespace coxmec
