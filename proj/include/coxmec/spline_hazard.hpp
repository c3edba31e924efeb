#pragma once

#include <vector>

namespace coxmec {

/*
 * Nonnegative L-Lipschitz piecewise-linear hazard on [0, tau].
 *
 * Two representations share the type:
 *
 *   Tent    the pointwise-minimal L-Lipschitz function that passes
 *           through the given (knot, value) pairs and stays >= floor:
 *               lambda(t) = max(floor, max_k { v_k - L |t - t_k| }).
 *           Between adjacent knots this descends at slope -L from the
 *           left knot, is truncated at the floor, and ascends at slope
 *           +L into the right knot; before the first knot and after the
 *           last it is the single ascending/descending line, truncated
 *           at the floor.  Adjacent values must satisfy
 *           |v_{k+1} - v_k| <= L (t_{k+1} - t_k), and all values must be
 *           >= floor, else the node set is not interpolable.
 *
 *   Interp  straight linear interpolation of the (knot, value) pairs,
 *           extended as a constant before the first knot and after the
 *           last.  Segment slopes must not exceed L in magnitude.
 *
 * The floor is 0 for unconstrained fits; the second estimation stage
 * re-fits with floor = mu/2 > 0, and the tent pieces truncate there
 * instead of at 0.
 *
 * Construction validates the shape constraints and materializes an exact
 * piecewise-linear decomposition, so evaluation, integration, inversion
 * and minimization are all closed-form.
 */
class SplineHazard {
public:
  enum class Mode { Tent, Interp };

  SplineHazard(Mode mode, double tau, double lipschitz_L, std::vector<double> knots,
               std::vector<double> values, double floor = 0.0);

  Mode mode() const { return mode_; }
  double tau() const { return tau_; }
  double lipschitz() const { return L_; }
  double floor() const { return floor_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  // Point evaluation; throws domain_error outside [0, tau].
  double operator()(double t) const;

  // Exact integral over [0, y]; throws domain_error outside [0, tau].
  double cumulative(double y) const;

  // Smallest y with cumulative(y) = s.  Requires min_value() > 0 and
  // s in [0, cumulative(tau)].
  double inverse_cumulative(double s) const;

  // Exact minimum over [0, tau].
  double min_value() const;

  // All kink locations, including 0 and tau; the hazard is linear
  // between consecutive entries.
  const std::vector<double>& breakpoints() const { return pts_; }
  const std::vector<double>& breakpoint_values() const { return vals_; }

  // Membership in the shape class: nonnegative, |slope| <= L.
  bool in_cone(double tol = 1e-9) const;

private:
  void build_tent();
  void build_interp();
  void push_point(double t, double v);
  void finalize();

  Mode mode_;
  double tau_;
  double L_;
  double floor_;
  std::vector<double> knots_;
  std::vector<double> values_;

  std::vector<double> pts_;    // breakpoints, strictly increasing, pts_[0]=0, back()=tau
  std::vector<double> vals_;   // hazard at breakpoints
  std::vector<double> prefix_; // cumulative integral at breakpoints
};

// Pointwise-minimal cone member through the nodes (Tent-mode constructor
// with validation); the canonical reduction used by the estimator.
SplineHazard tent_transform(std::vector<double> knots, std::vector<double> values,
                            double lipschitz_L, double tau, double floor = 0.0);

// Exact sup-norm distance over [lo, hi] between two piecewise-linear
// hazards on a common [0, tau].
double sup_norm_diff(const SplineHazard& a, const SplineHazard& b, double lo, double hi);

} // namespace coxmec
