#pragma once

#include <vector>

#include <Eigen/Core>

#include "coxmec/dataset.hpp"
#include "coxmec/error_model.hpp"

namespace coxmec {

namespace detail {

// Exact integral of max(floor, line) for one linear piece of length len
// starting at value v_start with the given slope.  active_len receives
// the measure where the line (not the floor) is active.
double line_floor_integral(double v_start, double slope, double len, double floor,
                           double* active_len);

} // namespace detail

/*
 * Knot structure shared by every reduced objective on one dataset: the
 * distinct sorted follow-up times, per-knot event counts, per-observation
 * knot indices, per-coordinate lower bounds and Lipschitz bands.  Built
 * once per (data, floor) pair; the beta-dependent weights live in
 * ReducedObjective.
 */
class ProfileContext {
public:
  ProfileContext(const Dataset& data, double lipschitz_L, double tau, double floor);

  const Dataset& data() const { return *data_; }
  double tau() const { return tau_; }
  double lipschitz() const { return L_; }
  double floor() const { return floor_; }
  std::size_t num_knots() const { return knots_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<int>& event_counts() const { return dcount_; }
  const std::vector<std::size_t>& knot_of() const { return knot_of_; }
  const std::vector<double>& lower_bounds() const { return lb_; }
  const std::vector<double>& bands() const { return bands_; }
  int total_events() const { return total_events_; }

private:
  const Dataset* data_;
  double tau_, L_, floor_;
  std::vector<double> knots_;
  std::vector<int> dcount_;
  std::vector<std::size_t> knot_of_;
  std::vector<double> lb_;
  std::vector<double> bands_;
  int total_events_ = 0;
};

/*
 * Reduced corrected objective for a fixed regression parameter.
 *
 * With beta held fixed the hazard maximizer is the tent spline through
 * node values v at the distinct follow-up times t_1 < ... < t_K, so the
 * infinite-dimensional problem collapses to K coordinates:
 *
 *   Q(v) = (1/n) sum_k d_k log v_k + lin
 *          - (1/n) [ W0 * I0(v) + sum_j R_j * S_j(v) ]
 *
 * where d_k counts events at knot k, lin collects the v-free delta*beta'W
 * terms, the per-observation weights c_i = e^{beta'W_i} / M_U(beta) are
 * aggregated into suffix sums (segment j contributes to every observation
 * ending at a later knot), and I0, S_j are exact integrals of the
 * floor-truncated envelope
 *
 *   lambda_v(t) = max(floor, max_k { v_k - L |t - t_k| }).
 *
 * The envelope form is defined for every v with positive event-knot
 * coordinates, not only band-feasible v; it is concave in v, and its
 * supremum over the plain box { v_k >= lower bound } equals the supremum
 * over the band-feasible set: a dominated node can be raised to the
 * envelope without changing the function, and the canonical node vector
 * v_k := lambda_v(t_k) is band-feasible with equal or better objective.
 * The envelope form is kinked wherever two nodes tie for the envelope,
 * which happens exactly where a band constraint is active, so it is the
 * wrong surface for gradient ascent: constrained optima sit on those
 * kinks and a one-sided supergradient can stall the line search there.
 * The solver therefore ascends the local form (see local_value), which
 * agrees with the envelope form on the band-feasible set but stays
 * continuously differentiable, and the chain projection keeps iterates
 * in that set.
 */
class ReducedObjective {
public:
  ReducedObjective(const ProfileContext& ctx, const Eigen::VectorXd& beta,
                   const ErrorModel& error);

  const ProfileContext& context() const { return *ctx_; }

  // Envelope-form objective value; -HUGE_VAL if an event knot has v <= 0.
  double value(const std::vector<double>& v) const;

  // Envelope-form objective and gradient; grad is resized to K.  At
  // envelope ties the reported vector is one supergradient.
  double value_and_grad(const std::vector<double>& v, std::vector<double>& grad) const;

  // Same objective through adjacent-knot segments only: between knots j
  // and j+1 the integrand is max(floor, v_j - L(t-t_j), v_{j+1} - L(t_{j+1}-t)).
  // Equal to value() whenever v is band-feasible, concave everywhere, and
  // for L > 0 continuously differentiable in v (lines of slope -L and +L
  // never coincide), so projected ascent over the band polytope cannot
  // jam on a supergradient selection.  This is the inner solver's surface.
  double local_value(const std::vector<double>& v) const;
  double local_value_and_grad(const std::vector<double>& v, std::vector<double>& grad) const;

  // Local form with its tridiagonal Hessian (hess_diag size K, hess_off
  // size K-1).  The integral terms are piecewise quadratic in v, so the
  // Hessian is piecewise constant and exact within each regime; at a
  // regime boundary a one-sided selection is returned.  Always negative
  // semidefinite (the local form is concave).
  double local_value_grad_hess(const std::vector<double>& v, std::vector<double>& grad,
                               std::vector<double>& hess_diag,
                               std::vector<double>& hess_off) const;

  // Envelope evaluated at the knots: band-feasible, >= floor, objective
  // no smaller than value(v).
  std::vector<double> canonicalize(const std::vector<double>& v) const;

  // Objective restricted to band-feasible interpolating v, accumulated
  // segment by segment (used by the exhaustive oracle): the contribution
  // of segment j given adjacent node values, and of the boundary piece.
  double feasible_segment_term(std::size_t j, double vj, double vj1) const;
  double feasible_boundary_term(double v0) const;
  double feasible_log_term(std::size_t k, double vk) const;
  double linear_term() const { return lin_; }

  double weight_total() const { return weight_total_; }
  // sum_i c_i y_i, the slope of the integral term for a constant hazard.
  double weighted_time_total() const { return weighted_time_; }

private:
  double envelope_terms(const std::vector<double>& v, std::vector<double>* grad) const;
  double local_terms(const std::vector<double>& v, std::vector<double>* grad) const;
  double accumulate(const std::vector<double>& v, std::vector<double>* grad, bool local) const;

  const ProfileContext* ctx_;
  std::vector<double> weight_; // summed c_i per knot
  std::vector<double> suffix_; // suffix_[j] = sum_{k > j} weight_[k]
  double weight_total_ = 0.0;
  double weighted_time_ = 0.0;
  double lin_ = 0.0;

  mutable std::vector<double> pmax_, smax_;
  mutable std::vector<int> parg_, sarg_;
};

} // namespace coxmec
