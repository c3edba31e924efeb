#include "coxmec/spline_hazard.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coxmec/errors.hpp"

namespace coxmec {

namespace {

// Feasibility slack for adjacent-value checks; pure roundoff allowance.
double feas_tol(double a, double b, double band) {
  return 1e-12 * (1.0 + std::abs(a) + std::abs(b) + std::abs(band));
}

} // namespace

SplineHazard::SplineHazard(Mode mode, double tau, double lipschitz_L,
                           std::vector<double> knots, std::vector<double> values,
                           double floor)
    : mode_(mode), tau_(tau), L_(lipschitz_L), floor_(floor), knots_(std::move(knots)),
      values_(std::move(values)) {
  if (!(tau_ > 0.0) || !std::isfinite(tau_))
    throw usage_error("SplineHazard: tau must be positive and finite");
  if (!(L_ >= 0.0) || !std::isfinite(L_))
    throw usage_error("SplineHazard: Lipschitz constant must be nonnegative and finite");
  if (!(floor_ >= 0.0) || !std::isfinite(floor_))
    throw usage_error("SplineHazard: floor must be nonnegative and finite");
  if (knots_.empty() || knots_.size() != values_.size())
    throw usage_error("SplineHazard: knots and values must be nonempty and equal-sized");
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    if (!std::isfinite(knots_[k]) || knots_[k] < 0.0 || knots_[k] > tau_)
      throw usage_error("SplineHazard: knots must lie in [0, tau]");
    if (k > 0 && !(knots_[k] > knots_[k - 1]))
      throw usage_error("SplineHazard: knots must be strictly increasing");
    if (!std::isfinite(values_[k]))
      throw usage_error("SplineHazard: values must be finite");
  }
  if (mode_ == Mode::Interp && floor_ != 0.0)
    throw usage_error("SplineHazard: floor applies to tent mode only");

  if (mode_ == Mode::Tent)
    build_tent();
  else
    build_interp();
  finalize();
}

void SplineHazard::push_point(double t, double v) {
  if (!pts_.empty()) {
    if (t <= pts_.back()) return; // skip coincident kinks
  }
  pts_.push_back(t);
  vals_.push_back(v);
}

void SplineHazard::build_tent() {
  const std::size_t K = knots_.size();
  for (std::size_t k = 0; k < K; ++k) {
    if (values_[k] < floor_ - feas_tol(values_[k], floor_, 0.0))
      throw constraint_error("tent: node values must be >= floor");
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double band = L_ * (knots_[k + 1] - knots_[k]);
    if (std::abs(values_[k + 1] - values_[k]) >
        band + feas_tol(values_[k], values_[k + 1], band))
      throw constraint_error(
          "tent: adjacent node values violate the Lipschitz band |dv| <= L*dt");
  }

  const auto clampf = [&](double v) { return std::max(v, floor_); };
  // Crossings this close to a segment edge are roundoff artifacts of an
  // exactly active constraint; folding them into the edge moves the
  // function by at most 2 L eps_t.
  const double eps_t = 1e-13 * std::max(1.0, tau_);

  // Piece before the first knot: ascending line into (t_0, v_0),
  // truncated at the floor.
  if (knots_.front() > 0.0) {
    const double t0 = knots_.front(), v0 = values_.front();
    const double at0 = v0 - L_ * t0; // line value at time 0
    if (L_ > 0.0 && at0 < floor_) {
      const double cross = t0 - (v0 - floor_) / L_;
      push_point(0.0, floor_);
      if (cross > eps_t && cross < t0 - eps_t) push_point(cross, floor_);
    } else {
      push_point(0.0, clampf(at0));
    }
  }
  push_point(knots_.front(), clampf(values_.front()));

  // Interior segments: descend from v_k, truncate at the floor, ascend
  // into v_{k+1}; without truncation the two lines meet at the midpoint
  // shifted by (v_k - v_{k+1}) / (2L).
  for (std::size_t k = 0; k + 1 < K; ++k) {
    const double ta = knots_[k], tb = knots_[k + 1];
    const double va = std::max(values_[k], floor_), vb = std::max(values_[k + 1], floor_);
    if (L_ == 0.0) {
      push_point(tb, vb);
      continue;
    }
    const double cross_v = 0.5 * (va + vb) - 0.5 * L_ * (tb - ta);
    if (cross_v >= floor_) {
      const double cross_t = 0.5 * (ta + tb) + 0.5 * (va - vb) / L_;
      if (cross_t > ta + eps_t && cross_t < tb - eps_t) push_point(cross_t, cross_v);
    } else {
      const double x1 = ta + (va - floor_) / L_;
      const double x2 = tb - (vb - floor_) / L_;
      if (x1 > ta + eps_t && x1 < tb - eps_t) push_point(x1, floor_);
      if (x2 > x1 + eps_t && x2 < tb - eps_t) push_point(x2, floor_);
    }
    push_point(tb, vb);
  }

  // Piece after the last knot: descending line from (t_K, v_K),
  // truncated at the floor.
  if (knots_.back() < tau_) {
    const double tK = knots_.back(), vK = std::max(values_.back(), floor_);
    if (L_ > 0.0) {
      const double cross = tK + (vK - floor_) / L_;
      if (cross < tau_ - eps_t) {
        if (cross > tK + eps_t) push_point(cross, floor_);
        push_point(tau_, floor_);
      } else {
        push_point(tau_, clampf(vK - L_ * (tau_ - tK)));
      }
    } else {
      push_point(tau_, vK);
    }
  }
}

void SplineHazard::build_interp() {
  const std::size_t K = knots_.size();
  for (std::size_t k = 0; k < K; ++k) {
    if (values_[k] < 0.0) throw constraint_error("interp: values must be nonnegative");
    if (k + 1 < K) {
      const double dt = knots_[k + 1] - knots_[k];
      const double dv = values_[k + 1] - values_[k];
      if (std::abs(dv) > L_ * dt + feas_tol(values_[k], values_[k + 1], L_ * dt))
        throw constraint_error("interp: segment slope exceeds the Lipschitz constant");
    }
  }
  if (knots_.front() > 0.0) push_point(0.0, values_.front());
  for (std::size_t k = 0; k < K; ++k) push_point(knots_[k], values_[k]);
  if (knots_.back() < tau_) push_point(tau_, values_.back());
}

void SplineHazard::finalize() {
  if (pts_.size() == 1) { // single knot spanning the whole domain: constant
    pts_ = {0.0, tau_};
    vals_ = {vals_[0], vals_[0]};
  }
  if (pts_.front() != 0.0 || pts_.back() != tau_)
    throw numeric_error("SplineHazard: breakpoint span does not cover [0, tau]");
  prefix_.assign(pts_.size(), 0.0);
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    const double h = pts_[i] - pts_[i - 1];
    prefix_[i] = prefix_[i - 1] + 0.5 * (vals_[i] + vals_[i - 1]) * h;
  }
}

double SplineHazard::operator()(double t) const {
  if (!(t >= 0.0) || !(t <= tau_))
    throw std::domain_error("SplineHazard: evaluation point outside [0, tau]");
  const auto it = std::upper_bound(pts_.begin(), pts_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - pts_.begin());
  if (i == 0) return vals_.front();
  if (i == pts_.size()) return vals_.back();
  const double h = pts_[i] - pts_[i - 1];
  const double w = (t - pts_[i - 1]) / h;
  return (1.0 - w) * vals_[i - 1] + w * vals_[i];
}

double SplineHazard::cumulative(double y) const {
  if (!(y >= 0.0) || !(y <= tau_))
    throw std::domain_error("SplineHazard: integration endpoint outside [0, tau]");
  const auto it = std::upper_bound(pts_.begin(), pts_.end(), y);
  std::size_t i = static_cast<std::size_t>(it - pts_.begin());
  if (i == 0) return 0.0;
  if (i == pts_.size()) return prefix_.back();
  const double a = vals_[i - 1];
  const double slope = (vals_[i] - vals_[i - 1]) / (pts_[i] - pts_[i - 1]);
  const double x = y - pts_[i - 1];
  return prefix_[i - 1] + a * x + 0.5 * slope * x * x;
}

double SplineHazard::inverse_cumulative(double s) const {
  if (!(min_value() > 0.0))
    throw usage_error("SplineHazard::inverse_cumulative requires a strictly positive hazard");
  if (!(s >= 0.0) || !(s <= prefix_.back() * (1.0 + 1e-12)))
    throw usage_error("SplineHazard::inverse_cumulative: target outside [0, cumulative(tau)]");
  s = std::min(s, prefix_.back());
  // First piece whose right prefix reaches s.
  const auto it = std::lower_bound(prefix_.begin(), prefix_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - prefix_.begin());
  if (i == 0) return 0.0;
  const double r = s - prefix_[i - 1];
  const double h = pts_[i] - pts_[i - 1];
  const double a = vals_[i - 1];
  const double b = (vals_[i] - vals_[i - 1]) / h;
  // Solve a x + b x^2 / 2 = r on [0, h]; rationalized root is stable for
  // either sign of b because a > 0 and a + b h > 0.
  double x;
  const double disc = a * a + 2.0 * b * r;
  const double denom = a + std::sqrt(std::max(disc, 0.0));
  x = (denom > 0.0) ? 2.0 * r / denom : 0.0;
  x = std::clamp(x, 0.0, h);
  return pts_[i - 1] + x;
}

double SplineHazard::min_value() const {
  return *std::min_element(vals_.begin(), vals_.end());
}

bool SplineHazard::in_cone(double tol) const {
  for (double v : vals_)
    if (v < -tol) return false;
  for (std::size_t i = 1; i < pts_.size(); ++i) {
    const double slope = (vals_[i] - vals_[i - 1]) / (pts_[i] - pts_[i - 1]);
    if (std::abs(slope) > L_ + tol * (1.0 + L_)) return false;
  }
  return true;
}

SplineHazard tent_transform(std::vector<double> knots, std::vector<double> values,
                            double lipschitz_L, double tau, double floor) {
  return SplineHazard(SplineHazard::Mode::Tent, tau, lipschitz_L, std::move(knots),
                      std::move(values), floor);
}

double sup_norm_diff(const SplineHazard& a, const SplineHazard& b, double lo, double hi) {
  if (a.tau() != b.tau()) throw usage_error("sup_norm_diff: hazards live on different domains");
  if (!(lo >= 0.0) || !(hi <= a.tau()) || !(lo <= hi))
    throw usage_error("sup_norm_diff: invalid interval");
  std::vector<double> pts;
  pts.push_back(lo);
  for (double t : a.breakpoints())
    if (t > lo && t < hi) pts.push_back(t);
  for (double t : b.breakpoints())
    if (t > lo && t < hi) pts.push_back(t);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double m = 0.0;
  for (double t : pts) m = std::max(m, std::abs(a(t) - b(t)));
  return m;
}

} // namespace coxmec
