#pragma once

#include <vector>

#include <Eigen/Core>

#include "coxmec/rng.hpp"

namespace coxmec {

/*
 * Additive measurement-error model for the surrogate W = X + U.
 *
 * The correction divides e^{beta'W} by the moment generating function
 * M_U(beta) = E exp(beta'U), so the model must expose M_U exactly.  It
 * also exposes the vector moment E[U e^{beta'U}] (the gradient of M_U),
 * which the asymptotic formulas need, and sampling for simulation.
 *
 * Variants:
 *   none            U = 0,  M_U = 1
 *   gaussian        U ~ N(0, Sigma),  M_U(b) = exp(b'Sigma b / 2),
 *                   E[U e^{b'U}] = Sigma b * M_U(b)
 *   finite support  U in {u_j} with probs p_j,  M_U(b) = sum p_j e^{b'u_j}
 *
 * E U = 0 is required and enforced at construction: for finite support
 * the weighted atom mean must vanish, gaussian and none are mean-zero by
 * form.
 */
class ErrorModel {
public:
  enum class Kind { None, Gaussian, FiniteSupport };

  static ErrorModel none(Eigen::Index dim);
  static ErrorModel gaussian(const Eigen::MatrixXd& cov);
  static ErrorModel finite_support(const Eigen::MatrixXd& atoms, // rows are atoms
                                   const std::vector<double>& probs);
  // Convenience: U = +-u0 with probability 1/2 each (per component m = 1).
  static ErrorModel two_atom(double u0);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  double mgf(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd mgf_moment(const Eigen::VectorXd& beta) const;

  Eigen::VectorXd sample(Rng& rng) const;

  const Eigen::MatrixXd& cov() const { return cov_; } // gaussian only
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }

private:
  ErrorModel() = default;

  Kind kind_ = Kind::None;
  Eigen::Index dim_ = 0;
  Eigen::MatrixXd cov_;   // gaussian
  Eigen::MatrixXd chol_;  // lower factor of cov_
  Eigen::MatrixXd atoms_; // finite support, one atom per row
  std::vector<double> probs_;
};

} // namespace coxmec
