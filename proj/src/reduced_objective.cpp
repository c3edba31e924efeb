#include "coxmec/reduced_objective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coxmec/errors.hpp"

namespace coxmec {

namespace detail {

double line_floor_integral(double v_start, double slope, double len, double floor,
                           double* active_len) {
  if (!(len > 0.0)) {
    if (active_len) *active_len = 0.0;
    return 0.0;
  }
  const double v_end = v_start + slope * len;
  if (v_start >= floor && v_end >= floor) {
    if (active_len) *active_len = len;
    return 0.5 * (v_start + v_end) * len;
  }
  if (v_start <= floor && v_end <= floor) {
    if (active_len) *active_len = 0.0;
    return floor * len;
  }
  // The line crosses the floor exactly once.
  const double xc = (floor - v_start) / slope;
  if (v_start > floor) {
    if (active_len) *active_len = xc;
    return 0.5 * (v_start + floor) * xc + floor * (len - xc);
  }
  if (active_len) *active_len = len - xc;
  return floor * xc + 0.5 * (floor + v_end) * (len - xc);
}

/*
 * Integral over one inter-knot segment of
 *
 *   max(floor, dl - L x, al + L x),   x in [0, h],
 *
 * where dl is the descending line's value at the left edge and al the
 * ascending line's value at the left edge.  The two lines cross at
 * x* = (dl - al) / (2L); left of the (clipped) crossing the descending
 * line dominates, right of it the ascending one.  desc_len / asc_len
 * receive the floor-free measure of each piece, which by the envelope
 * theorem is the objective's sensitivity to the node that generated the
 * line.
 */
static double segment_integral(double dl, double al, double h, double L, double floor,
                               double* desc_len, double* asc_len) {
  double split;
  if (L > 0.0) {
    split = std::clamp((dl - al) / (2.0 * L), 0.0, h);
  } else {
    split = dl >= al ? h : 0.0;
  }
  const double left = line_floor_integral(dl, -L, split, floor, desc_len);
  const double right = line_floor_integral(al + L * split, L, h - split, floor, asc_len);
  return left + right;
}

/*
 * Second derivatives of segment_integral with respect to (dl, al).  The
 * first derivatives are the floor-free active lengths of the two lines,
 * so the curvature counts how those lengths move with the node values:
 *
 *   an interior line/line crossing above the floor moves by 1/(2L) per
 *   unit of either value, charging 1/(2L) to both diagonal entries and
 *   -1/(2L) to the cross term;
 *   an interior line/floor crossing moves the active length of that line
 *   alone by 1/L per unit of its value;
 *   clipped crossings contribute nothing (the active length is locally
 *   constant).
 *
 * Piecewise constant, hence exact within a regime; ties resolve to one
 * side.  The matrix [[cdd, cda], [cda, caa]] is positive semidefinite,
 * matching the convexity of the integral in the node values.
 */
static void segment_curvature(double dl, double al, double h, double L, double floor,
                              double& cdd, double& caa, double& cda) {
  cdd = caa = cda = 0.0;
  if (!(h > 0.0) || L <= 0.0) return;
  const double raw_split = (dl - al) / (2.0 * L);
  if (raw_split > 0.0 && raw_split < h) {
    if (dl + al > 2.0 * floor) {
      // The two lines cross each other above the floor.  Moving either
      // endpoint shifts the crossing, so each active length responds at
      // half rate and the endpoints couple.
      cdd = caa = 0.5 / L;
      cda = -0.5 / L;
    } else {
      // Both lines sink below the floor before they meet; each endpoint
      // only moves its own floor crossing and the two do not interact.
      if (dl > floor) cdd = 1.0 / L;
      if (al + L * h > floor) caa = 1.0 / L;
    }
    return;
  }
  // One line dominates the whole piece; curvature comes only from its
  // floor crossing when that falls strictly inside.
  if (raw_split >= h) {
    if (dl > floor && dl - L * h < floor) cdd = 1.0 / L;
  } else {
    if (al + L * h > floor && al < floor) caa = 1.0 / L;
  }
}

} // namespace detail

ProfileContext::ProfileContext(const Dataset& data, double lipschitz_L, double tau,
                               double floor)
    : data_(&data), tau_(tau), L_(lipschitz_L), floor_(floor) {
  if (!(std::isfinite(tau) && tau > 0.0))
    throw usage_error("ProfileContext: tau must be positive and finite");
  if (!(std::isfinite(lipschitz_L) && lipschitz_L >= 0.0))
    throw usage_error("ProfileContext: Lipschitz constant must be nonnegative");
  if (!(std::isfinite(floor) && floor >= 0.0))
    throw usage_error("ProfileContext: floor must be nonnegative");
  data.validate(tau);

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.y[a] < data.y[b]; });

  knot_of_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = order[r];
    if (knots_.empty() || data.y[i] > knots_.back()) {
      knots_.push_back(data.y[i]);
      dcount_.push_back(0);
    }
    knot_of_[i] = knots_.size() - 1;
    if (data.delta[i] != 0) {
      ++dcount_.back();
      ++total_events_;
    }
  }

  if (total_events_ > 0 && knots_.back() <= 0.0)
    throw data_error(
        "degenerate data: an event is recorded but every follow-up time is zero, "
        "so the fitted hazard is unbounded");

  const std::size_t K = knots_.size();
  lb_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    // Event knots need a strictly positive value for the log term; keep
    // the bound tiny so it never binds at an interior optimum.
    lb_[k] = dcount_[k] > 0 ? std::max(floor_, 1e-12) : floor_;
  }
  bands_.resize(K > 0 ? K - 1 : 0);
  for (std::size_t k = 0; k + 1 < K; ++k)
    bands_[k] = L_ * (knots_[k + 1] - knots_[k]);
}

ReducedObjective::ReducedObjective(const ProfileContext& ctx, const Eigen::VectorXd& beta,
                                   const ErrorModel& error)
    : ctx_(&ctx) {
  const Dataset& data = ctx.data();
  if (beta.size() != data.covariate_dim())
    throw usage_error("ReducedObjective: beta dimension does not match the data");
  const double mgf = error.mgf(beta);
  if (!(std::isfinite(mgf) && mgf > 0.0))
    throw numeric_error("ReducedObjective: error moment generating function is not positive");

  const std::size_t n = data.size();
  const std::size_t K = ctx.num_knots();
  weight_.assign(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double score = beta.dot(data.w.row(i));
    const double c = std::exp(score) / mgf;
    if (!std::isfinite(c))
      throw numeric_error("ReducedObjective: risk weight overflowed; shrink the parameter box");
    weight_[ctx.knot_of()[i]] += c;
    weighted_time_ += c * data.y[i];
    if (data.delta[i] != 0) lin_ += score;
  }
  lin_ /= static_cast<double>(n);

  suffix_.assign(K + 1, 0.0);
  for (std::size_t k = K; k-- > 0;) suffix_[k] = suffix_[k + 1] + weight_[k];
  weight_total_ = suffix_[0];
}

double ReducedObjective::envelope_terms(const std::vector<double>& v,
                                        std::vector<double>* grad) const {
  const std::size_t K = ctx_->num_knots();
  const std::vector<double>& t = ctx_->knots();
  const double L = ctx_->lipschitz();
  const double floor = ctx_->floor();

  pmax_.resize(K);
  parg_.resize(K);
  smax_.resize(K);
  sarg_.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double cand = v[k] + L * t[k];
    if (k == 0 || cand > pmax_[k - 1]) {
      pmax_[k] = cand;
      parg_[k] = static_cast<int>(k);
    } else {
      pmax_[k] = pmax_[k - 1];
      parg_[k] = parg_[k - 1];
    }
  }
  for (std::size_t k = K; k-- > 0;) {
    const double cand = v[k] - L * t[k];
    if (k + 1 == K || cand > smax_[k + 1]) {
      smax_[k] = cand;
      sarg_[k] = static_cast<int>(k);
    } else {
      smax_[k] = smax_[k + 1];
      sarg_[k] = sarg_[k + 1];
    }
  }

  double total = 0.0;
  // Piece before the first knot: only the ascending family is present.
  if (t[0] > 0.0) {
    double active = 0.0;
    const double piece =
        detail::line_floor_integral(smax_[0], L, t[0], floor, grad ? &active : nullptr);
    total += weight_total_ * piece;
    if (grad) (*grad)[static_cast<std::size_t>(sarg_[0])] += weight_total_ * active;
  }
  for (std::size_t j = 0; j + 1 < K; ++j) {
    const double r = suffix_[j + 1];
    if (r <= 0.0) break; // no observation reaches past knot j
    const double h = t[j + 1] - t[j];
    const double dl = pmax_[j] - L * t[j];
    const double al = smax_[j + 1] + L * t[j];
    double dlen = 0.0, alen = 0.0;
    const double piece = detail::segment_integral(dl, al, h, L, floor,
                                                  grad ? &dlen : nullptr,
                                                  grad ? &alen : nullptr);
    total += r * piece;
    if (grad) {
      (*grad)[static_cast<std::size_t>(parg_[j])] += r * dlen;
      (*grad)[static_cast<std::size_t>(sarg_[j + 1])] += r * alen;
    }
  }
  return total;
}

double ReducedObjective::local_terms(const std::vector<double>& v,
                                     std::vector<double>* grad) const {
  const std::size_t K = ctx_->num_knots();
  const std::vector<double>& t = ctx_->knots();
  const double L = ctx_->lipschitz();
  const double floor = ctx_->floor();

  double total = 0.0;
  if (t[0] > 0.0) {
    double active = 0.0;
    const double piece = detail::line_floor_integral(v[0] - L * t[0], L, t[0], floor,
                                                     grad ? &active : nullptr);
    total += weight_total_ * piece;
    if (grad) (*grad)[0] += weight_total_ * active;
  }
  for (std::size_t j = 0; j + 1 < K; ++j) {
    const double r = suffix_[j + 1];
    if (r <= 0.0) break; // no observation reaches past knot j
    const double h = t[j + 1] - t[j];
    double dlen = 0.0, alen = 0.0;
    const double piece = detail::segment_integral(v[j], v[j + 1] - L * h, h, L, floor,
                                                  grad ? &dlen : nullptr,
                                                  grad ? &alen : nullptr);
    total += r * piece;
    if (grad) {
      (*grad)[j] += r * dlen;
      (*grad)[j + 1] += r * alen;
    }
  }
  return total;
}

double ReducedObjective::accumulate(const std::vector<double>& v, std::vector<double>* grad,
                                    bool local) const {
  const std::size_t K = ctx_->num_knots();
  if (v.size() != K) throw usage_error("ReducedObjective: node vector has wrong length");
  if (grad) grad->assign(K, 0.0);
  const double n = static_cast<double>(ctx_->data().size());
  double logs = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const int d = ctx_->event_counts()[k];
    if (d == 0) continue;
    if (!(v[k] > 0.0)) return -HUGE_VAL;
    logs += d * std::log(v[k]);
  }
  const double integral = local ? local_terms(v, grad) : envelope_terms(v, grad);
  if (grad) {
    for (std::size_t k = 0; k < K; ++k) {
      const int d = ctx_->event_counts()[k];
      (*grad)[k] = (d > 0 ? d / v[k] : 0.0) / n - (*grad)[k] / n;
    }
  }
  return logs / n + lin_ - integral / n;
}

double ReducedObjective::value(const std::vector<double>& v) const {
  return accumulate(v, nullptr, false);
}

double ReducedObjective::value_and_grad(const std::vector<double>& v,
                                        std::vector<double>& grad) const {
  return accumulate(v, &grad, false);
}

double ReducedObjective::local_value(const std::vector<double>& v) const {
  return accumulate(v, nullptr, true);
}

double ReducedObjective::local_value_and_grad(const std::vector<double>& v,
                                              std::vector<double>& grad) const {
  return accumulate(v, &grad, true);
}

double ReducedObjective::local_value_grad_hess(const std::vector<double>& v,
                                               std::vector<double>& grad,
                                               std::vector<double>& hess_diag,
                                               std::vector<double>& hess_off) const {
  const double f = accumulate(v, &grad, true);
  const std::size_t K = ctx_->num_knots();
  hess_diag.assign(K, 0.0);
  hess_off.assign(K > 0 ? K - 1 : 0, 0.0);
  if (f == -HUGE_VAL) return f;

  const std::vector<double>& t = ctx_->knots();
  const double L = ctx_->lipschitz();
  const double floor = ctx_->floor();
  const double n = static_cast<double>(ctx_->data().size());

  for (std::size_t k = 0; k < K; ++k) {
    const int d = ctx_->event_counts()[k];
    if (d > 0) hess_diag[k] -= d / (v[k] * v[k] * n);
  }
  if (t[0] > 0.0 && L > 0.0) {
    // ascending boundary line: active length moves 1/L per unit of v[0]
    // while its floor crossing is interior
    const double xc = (floor - (v[0] - L * t[0])) / L;
    if (xc > 0.0 && xc < t[0]) hess_diag[0] -= weight_total_ / (L * n);
  }
  for (std::size_t j = 0; j + 1 < K; ++j) {
    const double r = suffix_[j + 1];
    if (r <= 0.0) break;
    const double h = t[j + 1] - t[j];
    double cdd = 0.0, caa = 0.0, cda = 0.0;
    detail::segment_curvature(v[j], v[j + 1] - L * h, h, L, floor, cdd, caa, cda);
    hess_diag[j] -= r * cdd / n;
    hess_diag[j + 1] -= r * caa / n;
    hess_off[j] -= r * cda / n;
  }
  return f;
}

std::vector<double> ReducedObjective::canonicalize(const std::vector<double>& v) const {
  const std::size_t K = ctx_->num_knots();
  if (v.size() != K) throw usage_error("ReducedObjective: node vector has wrong length");
  envelope_terms(v, nullptr); // refresh the prefix and suffix scans
  const std::vector<double>& t = ctx_->knots();
  const double L = ctx_->lipschitz();
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k)
    out[k] = std::max(ctx_->floor(), std::max(pmax_[k] - L * t[k], smax_[k] + L * t[k]));
  return out;
}

double ReducedObjective::feasible_segment_term(std::size_t j, double vj, double vj1) const {
  const std::vector<double>& t = ctx_->knots();
  const double L = ctx_->lipschitz();
  const double h = t[j + 1] - t[j];
  const double piece =
      detail::segment_integral(vj, vj1 - L * h, h, L, ctx_->floor(), nullptr, nullptr);
  return -suffix_[j + 1] * piece / static_cast<double>(ctx_->data().size());
}

double ReducedObjective::feasible_boundary_term(double v0) const {
  const double t0 = ctx_->knots()[0];
  if (!(t0 > 0.0)) return 0.0;
  const double L = ctx_->lipschitz();
  const double piece =
      detail::line_floor_integral(v0 - L * t0, L, t0, ctx_->floor(), nullptr);
  return -weight_total_ * piece / static_cast<double>(ctx_->data().size());
}

double ReducedObjective::feasible_log_term(std::size_t k, double vk) const {
  const int d = ctx_->event_counts()[k];
  if (d == 0) return 0.0;
  if (!(vk > 0.0)) return -HUGE_VAL;
  return d * std::log(vk) / static_cast<double>(ctx_->data().size());
}

} // namespace coxmec
