#include "coxmec/truth.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "coxmec/errors.hpp"
#include "coxmec/quadrature.hpp"

namespace coxmec {

namespace {

void check_probabilities(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw usage_error("CovariateLaw: probabilities must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw usage_error("CovariateLaw: probabilities must sum to 1");
}

} // namespace

CovariateLaw CovariateLaw::finite_support(const Eigen::MatrixXd& atoms,
                                          const std::vector<double>& probs) {
  if (atoms.rows() < 1 || atoms.cols() < 1)
    throw usage_error("CovariateLaw: need at least one atom and one dimension");
  if (static_cast<std::size_t>(atoms.rows()) != probs.size())
    throw usage_error("CovariateLaw: one probability per atom required");
  if (!atoms.allFinite()) throw usage_error("CovariateLaw: atoms must be finite");
  check_probabilities(probs);

  CovariateLaw law;
  law.kind_ = Kind::FiniteSupport;
  law.nodes_ = atoms;
  law.weights_ = probs;
  double sum = 0.0;
  for (double p : probs) sum += p;
  for (double& w : law.weights_) w /= sum;
  return law;
}

CovariateLaw CovariateLaw::gaussian(const Eigen::VectorXd& mean,
                                    const Eigen::MatrixXd& cov, int nodes_per_dim) {
  const Eigen::Index d = mean.size();
  if (d < 1 || d > 2)
    throw usage_error("CovariateLaw: gaussian laws support dimension 1 or 2");
  if (cov.rows() != d || cov.cols() != d)
    throw usage_error("CovariateLaw: covariance shape must match the mean");
  if (nodes_per_dim < 2)
    throw usage_error("CovariateLaw: need at least 2 quadrature nodes per dimension");
  if (!mean.allFinite() || !cov.allFinite())
    throw usage_error("CovariateLaw: gaussian parameters must be finite");

  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success)
    throw usage_error("CovariateLaw: covariance must be positive definite");

  std::vector<double> z, wz;
  gauss_hermite_normal(nodes_per_dim, z, wz);

  CovariateLaw law;
  law.kind_ = Kind::Gaussian;
  law.mean_ = mean;
  law.chol_ = llt.matrixL();
  if (d == 1) {
    law.nodes_.resize(nodes_per_dim, 1);
    law.weights_.resize(static_cast<std::size_t>(nodes_per_dim));
    for (int i = 0; i < nodes_per_dim; ++i) {
      law.nodes_(i, 0) = mean[0] + law.chol_(0, 0) * z[static_cast<std::size_t>(i)];
      law.weights_[static_cast<std::size_t>(i)] = wz[static_cast<std::size_t>(i)];
    }
  } else {
    law.nodes_.resize(nodes_per_dim * nodes_per_dim, 2);
    law.weights_.resize(static_cast<std::size_t>(nodes_per_dim * nodes_per_dim));
    Eigen::Index r = 0;
    for (int i = 0; i < nodes_per_dim; ++i)
      for (int j = 0; j < nodes_per_dim; ++j, ++r) {
        Eigen::Vector2d zz(z[static_cast<std::size_t>(i)], z[static_cast<std::size_t>(j)]);
        law.nodes_.row(r) = (mean + law.chol_ * zz).transpose();
        law.weights_[static_cast<std::size_t>(r)] =
            wz[static_cast<std::size_t>(i)] * wz[static_cast<std::size_t>(j)];
      }
  }
  return law;
}

CovariateLaw CovariateLaw::uniform_three_point() {
  Eigen::MatrixXd atoms(3, 1);
  atoms << -1.0, 0.0, 1.0;
  return finite_support(atoms, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
}

Eigen::VectorXd CovariateLaw::mean() const {
  if (kind_ == Kind::Gaussian) return mean_;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
  for (Eigen::Index j = 0; j < nodes_.rows(); ++j)
    m += weights_[static_cast<std::size_t>(j)] * nodes_.row(j).transpose();
  return m;
}

Eigen::MatrixXd CovariateLaw::covariance() const {
  if (kind_ == Kind::Gaussian) return chol_ * chol_.transpose();
  const Eigen::VectorXd m = mean();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim(), dim());
  for (Eigen::Index j = 0; j < nodes_.rows(); ++j) {
    const Eigen::VectorXd d = nodes_.row(j).transpose() - m;
    c += weights_[static_cast<std::size_t>(j)] * d * d.transpose();
  }
  return c;
}

Eigen::VectorXd CovariateLaw::sample(Rng& rng) const {
  if (kind_ == Kind::Gaussian) {
    Eigen::VectorXd z(dim());
    for (Eigen::Index j = 0; j < dim(); ++j) z[j] = rng.normal();
    return mean_ + chol_ * z;
  }
  const std::size_t j = rng.categorical(weights_);
  return nodes_.row(static_cast<Eigen::Index>(j)).transpose();
}

CensorLaw CensorLaw::at_tau() { return CensorLaw(0.0, 0.0, 1.0); }

CensorLaw CensorLaw::uniform_mix(double lo, double hi, double atom_weight) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw usage_error("CensorLaw: need finite bounds with hi >= lo");
  if (!(atom_weight >= 0.0 && atom_weight <= 1.0))
    throw usage_error("CensorLaw: atom weight must lie in [0, 1]");
  if (atom_weight < 1.0 && hi == lo)
    throw usage_error("CensorLaw: the uniform component needs hi > lo");
  return CensorLaw(lo, hi, atom_weight);
}

double CensorLaw::survival(double t, double tau) const {
  double unif = 0.0;
  if (atom_ < 1.0) {
    if (t < lo_)
      unif = 1.0;
    else if (t < hi_)
      unif = (hi_ - t) / (hi_ - lo_);
  }
  return (t < tau ? atom_ : 0.0) + (1.0 - atom_) * unif;
}

double CensorLaw::survival_left(double t, double tau) const {
  double unif = 0.0;
  if (atom_ < 1.0) {
    if (t <= lo_)
      unif = 1.0;
    else if (t <= hi_)
      unif = (hi_ - t) / (hi_ - lo_);
  }
  return (t <= tau ? atom_ : 0.0) + (1.0 - atom_) * unif;
}

double CensorLaw::sample(Rng& rng, double tau) const {
  if (atom_ >= 1.0 || rng.uniform() < atom_) return tau;
  return lo_ + (hi_ - lo_) * rng.uniform();
}

double Truth::lifetime_survival(double t, const Eigen::VectorXd& x) const {
  return std::exp(-std::exp(beta0.dot(x)) * hazard0.cumulative(t));
}

void Truth::validate() const {
  if (x_law.dim() != dim() || error.dim() != dim())
    throw usage_error("Truth: beta0, the covariate law and the error model must share "
                      "one dimension");

  if (!(hazard0.min_value() > 0.0)) {
    std::ostringstream os;
    os << "model condition (vii) fails: the baseline hazard must be strictly positive "
          "on [0, tau] (minimum value "
       << hazard0.min_value() << ")";
    throw usage_error(os.str());
  }

  const auto& pts = hazard0.breakpoints();
  const auto& vals = hazard0.breakpoint_values();
  double max_slope = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    max_slope = std::max(max_slope,
                         std::abs(vals[i + 1] - vals[i]) / (pts[i + 1] - pts[i]));
  if (max_slope >= hazard0.lipschitz()) {
    std::ostringstream os;
    os << "model condition (ix) fails: the baseline hazard must lie strictly inside "
          "the Lipschitz cone (max slope "
       << max_slope << " vs constant " << hazard0.lipschitz() << ")";
    throw usage_error(os.str());
  }

  if (censor.atom_weight() < 1.0) {
    if (censor.uniform_lo() < 0.0 || censor.uniform_hi() > tau()) {
      std::ostringstream os;
      os << "model condition (v) fails: the censoring support [" << censor.uniform_lo()
         << ", " << censor.uniform_hi() << "] must lie inside [0, " << tau() << "]";
      throw usage_error(os.str());
    }
    if (!(censor.uniform_lo() > 0.0))
      throw usage_error("model condition (x) fails: the censoring time must be "
                        "bounded away from zero");
  }

  const Eigen::MatrixXd cov = x_law.covariance();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-12) {
    throw usage_error("model condition (vi) fails: the covariate covariance matrix "
                      "must be positive definite");
  }
}

void Truth::check_interior(const ParamBox& box) const {
  if (box.dim() != dim())
    throw usage_error("Truth: parameter box dimension must match beta0");
  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (!(box.lower[i] < beta0[i] && beta0[i] < box.upper[i])) {
      std::ostringstream os;
      os << "model condition (viii) fails: beta0[" << i << "] = " << beta0[i]
         << " must lie in the open interval (" << box.lower[i] << ", " << box.upper[i]
         << ")";
      throw usage_error(os.str());
    }
  }
}

Truth Truth::default_fixture() {
  Eigen::MatrixXd cov(1, 1);
  cov(0, 0) = 0.09;
  return Truth{SplineHazard(SplineHazard::Mode::Interp, 1.0, 1.0, {0.0, 1.0},
                            {0.5, 0.9}),
               Eigen::VectorXd::Constant(1, 0.7), CovariateLaw::uniform_three_point(),
               CensorLaw::uniform_mix(0.2, 1.0, 0.2), ErrorModel::gaussian(cov)};
}

TruthRecord sample_record(const Truth& truth, Rng& rng) {
  TruthRecord rec;
  rec.x = truth.x_law.sample(rng);
  const double e = rng.exponential();
  rec.censor = truth.censor.sample(rng, truth.tau());
  rec.u = truth.error.sample(rng);

  // T solves Lambda_0(T) e^{beta0'X} = E; beyond Lambda_0(tau) the event
  // cannot be observed and only the censoring time matters.
  const double target = e * std::exp(-truth.beta0.dot(rec.x));
  const double reach = truth.hazard0.cumulative(truth.tau());
  rec.lifetime = target > reach ? std::numeric_limits<double>::infinity()
                                : truth.hazard0.inverse_cumulative(target);

  rec.delta = rec.lifetime <= rec.censor ? 1 : 0;
  rec.y = rec.delta ? rec.lifetime : rec.censor;
  rec.w = rec.x + rec.u;
  return rec;
}

} // namespace coxmec
