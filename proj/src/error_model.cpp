#include "coxmec/error_model.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "coxmec/errors.hpp"

namespace coxmec {

ErrorModel ErrorModel::none(Eigen::Index dim) {
  if (dim < 1) throw usage_error("ErrorModel::none: dimension must be >= 1");
  ErrorModel e;
  e.kind_ = Kind::None;
  e.dim_ = dim;
  return e;
}

ErrorModel ErrorModel::gaussian(const Eigen::MatrixXd& cov) {
  if (cov.rows() < 1 || cov.rows() != cov.cols())
    throw usage_error("ErrorModel::gaussian: covariance must be square and nonempty");
  if (!cov.isApprox(cov.transpose(), 1e-12))
    throw usage_error("ErrorModel::gaussian: covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    // Allow PSD with zero directions (e.g. a zero matrix); fall back to
    // LDLT-style square root via eigendecomposition-free pivoting: for the
    // supported use cases a plain check suffices.
    Eigen::MatrixXd shifted = cov + 1e-300 * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
    Eigen::LLT<Eigen::MatrixXd> llt2(shifted);
    if (llt2.info() != Eigen::Success)
      throw usage_error("ErrorModel::gaussian: covariance must be positive semidefinite");
    ErrorModel e;
    e.kind_ = Kind::Gaussian;
    e.dim_ = cov.rows();
    e.cov_ = cov;
    e.chol_ = llt2.matrixL();
    return e;
  }
  ErrorModel e;
  e.kind_ = Kind::Gaussian;
  e.dim_ = cov.rows();
  e.cov_ = cov;
  e.chol_ = llt.matrixL();
  return e;
}

ErrorModel ErrorModel::finite_support(const Eigen::MatrixXd& atoms,
                                      const std::vector<double>& probs) {
  if (atoms.rows() < 1 || atoms.cols() < 1)
    throw usage_error("ErrorModel::finite_support: no atoms");
  if (static_cast<std::size_t>(atoms.rows()) != probs.size())
    throw usage_error("ErrorModel::finite_support: atom/probability count mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw usage_error("ErrorModel::finite_support: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw usage_error("ErrorModel::finite_support: probabilities must sum to 1");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(atoms.cols());
  for (Eigen::Index j = 0; j < atoms.rows(); ++j)
    mean += probs[static_cast<std::size_t>(j)] * atoms.row(j).transpose();
  const double scale = 1.0 + atoms.cwiseAbs().maxCoeff();
  if (mean.lpNorm<Eigen::Infinity>() > 1e-9 * scale)
    throw usage_error("ErrorModel::finite_support: atoms must have mean zero");
  ErrorModel e;
  e.kind_ = Kind::FiniteSupport;
  e.dim_ = atoms.cols();
  e.atoms_ = atoms;
  e.probs_ = probs;
  return e;
}

ErrorModel ErrorModel::two_atom(double u0) {
  Eigen::MatrixXd atoms(2, 1);
  atoms << u0, -u0;
  return finite_support(atoms, {0.5, 0.5});
}

double ErrorModel::mgf(const Eigen::VectorXd& beta) const {
  if (beta.size() != dim_) throw usage_error("ErrorModel::mgf: dimension mismatch");
  switch (kind_) {
    case Kind::None:
      return 1.0;
    case Kind::Gaussian:
      return std::exp(0.5 * beta.dot(cov_ * beta));
    case Kind::FiniteSupport: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < atoms_.rows(); ++j)
        s += probs_[static_cast<std::size_t>(j)] * std::exp(atoms_.row(j).dot(beta));
      return s;
    }
  }
  return 1.0;
}

Eigen::VectorXd ErrorModel::mgf_moment(const Eigen::VectorXd& beta) const {
  if (beta.size() != dim_) throw usage_error("ErrorModel::mgf_moment: dimension mismatch");
  switch (kind_) {
    case Kind::None:
      return Eigen::VectorXd::Zero(dim_);
    case Kind::Gaussian:
      return (cov_ * beta) * mgf(beta);
    case Kind::FiniteSupport: {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
      for (Eigen::Index j = 0; j < atoms_.rows(); ++j)
        s += probs_[static_cast<std::size_t>(j)] * std::exp(atoms_.row(j).dot(beta)) *
             atoms_.row(j).transpose();
      return s;
    }
  }
  return Eigen::VectorXd::Zero(dim_);
}

Eigen::VectorXd ErrorModel::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::None:
      return Eigen::VectorXd::Zero(dim_);
    case Kind::Gaussian: {
      Eigen::VectorXd z(dim_);
      for (Eigen::Index j = 0; j < dim_; ++j) z[j] = rng.normal();
      return chol_ * z;
    }
    case Kind::FiniteSupport: {
      const std::size_t j = rng.categorical(probs_);
      return atoms_.row(static_cast<Eigen::Index>(j)).transpose();
    }
  }
  return Eigen::VectorXd::Zero(dim_);
}

} // namespace coxmec
