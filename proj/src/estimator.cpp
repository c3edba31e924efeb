#include "coxmec/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coxmec/errors.hpp"
#include "coxmec/objective.hpp"
#include "coxmec/rng.hpp"

namespace coxmec {

namespace {

void check_inputs(const Dataset& data, const ErrorModel& error, const FitConfig& cfg) {
  if (data.size() == 0) throw usage_error("fit: empty dataset");
  if (cfg.param_box.dim() != data.covariate_dim())
    throw usage_error("fit: parameter box dimension does not match the covariates");
  if (error.dim() != data.covariate_dim())
    throw usage_error("fit: error model dimension does not match the covariates");
}

std::vector<Eigen::VectorXd> start_points(const ParamBox& box, int count,
                                          std::uint64_t seed) {
  std::vector<Eigen::VectorXd> pts;
  auto push_unique = [&](const Eigen::VectorXd& x) {
    for (const Eigen::VectorXd& p : pts)
      if ((p - x).lpNorm<Eigen::Infinity>() <= 1e-12) return;
    pts.push_back(x);
  };
  if (box.dim() <= 16) {
    for (unsigned mask = 0; mask < (1u << box.dim()); ++mask) {
      if (static_cast<int>(pts.size()) >= count) break;
      push_unique(box.corner(mask));
    }
  }
  if (static_cast<int>(pts.size()) < count) push_unique(box.midpoint());
  Rng rng(substream_seed(seed, 0x5354u)); // start-point stream
  while (static_cast<int>(pts.size()) < count) {
    Eigen::VectorXd x(box.dim());
    for (Eigen::Index j = 0; j < box.dim(); ++j)
      x[j] = rng.uniform(box.lower[j], box.upper[j]);
    pts.push_back(x);
  }
  return pts;
}

int count_active_bounds(const Eigen::VectorXd& beta, const ParamBox& box) {
  int active = 0;
  for (Eigen::Index j = 0; j < box.dim(); ++j) {
    const double tol = 1e-9 * (1.0 + box.upper[j] - box.lower[j]);
    if (beta[j] <= box.lower[j] + tol || beta[j] >= box.upper[j] - tol) ++active;
  }
  return active;
}

Estimate assemble(const Dataset& data, const ErrorModel& error, const FitConfig& cfg,
                  const ProfileContext& ctx, const Eigen::VectorXd& beta,
                  const ProfileFit& profile, double floor) {
  SplineHazard hazard =
      tent_transform(ctx.knots(), profile.node_values, cfg.lipschitz_L, cfg.tau, floor);
  const ExtReal q = corrected_objective(data, hazard, beta, error);
  Estimate est{std::move(hazard), beta, q.value(), 1, {}};
  est.diagnostics.epsilon = cfg.epsilon.resolve(data.size());
  est.diagnostics.floor = floor;
  est.diagnostics.inner_iterations = profile.iterations;
  est.diagnostics.active_bounds = count_active_bounds(beta, cfg.param_box);
  est.diagnostics.converged = profile.converged;
  return est;
}

// Multistart simplex search over beta with the hazard profiled out.
Estimate run_search(const Dataset& data, const ErrorModel& error, const FitConfig& cfg,
                    double floor) {
  check_inputs(data, error, cfg);
  ProfileContext ctx(data, cfg.lipschitz_L, cfg.tau, floor);

  if (ctx.total_events() == 0) {
    // Every term is -c_i * integral of lambda: the zero hazard (or the
    // floor, when one is imposed) is the exact maximizer and beta is not
    // identified; report the box midpoint.
    ProfileFit flat;
    flat.node_values.assign(ctx.num_knots(), floor);
    flat.converged = true;
    Estimate est = assemble(data, error, cfg, ctx, cfg.param_box.midpoint(), flat, floor);
    est.diagnostics.multistarts = 0;
    return est;
  }

  if (cfg.param_box.degenerate()) {
    const Eigen::VectorXd beta = cfg.param_box.midpoint();
    ReducedObjective ro(ctx, beta, error);
    ProfileFit pf = maximize_profile(ro, cfg.inner);
    Estimate est = assemble(data, error, cfg, ctx, beta, pf, floor);
    est.diagnostics.multistarts = 1;
    return est;
  }

  const std::vector<Eigen::VectorXd> starts =
      start_points(cfg.param_box, std::max(1, cfg.outer.multistarts), cfg.seed);

  bool have_best = false;
  Eigen::VectorXd best_beta;
  ProfileFit best_profile;
  bool best_converged = false;
  double best_f = -std::numeric_limits<double>::infinity();
  double worst_f = std::numeric_limits<double>::infinity();
  int total_evals = 0;

  for (const Eigen::VectorXd& start : starts) {
    std::vector<double> warm;
    auto profiled = [&](const Eigen::VectorXd& b) {
      ReducedObjective ro(ctx, b, error);
      ProfileFit pf = maximize_profile(ro, cfg.inner, warm.empty() ? nullptr : &warm);
      warm = pf.node_values;
      return pf.objective;
    };
    NelderMeadResult nm =
        nelder_mead_maximize(profiled, start, cfg.param_box, cfg.outer.search);
    total_evals += nm.evals;

    ReducedObjective ro(ctx, nm.x, error);
    ProfileFit pf = maximize_profile(ro, cfg.inner, warm.empty() ? nullptr : &warm);
    worst_f = std::min(worst_f, pf.objective);
    // Strict comparison keeps the earliest start on ties.
    if (!have_best || pf.objective > best_f) {
      have_best = true;
      best_f = pf.objective;
      best_beta = nm.x;
      best_profile = std::move(pf);
      best_converged = nm.converged;
    }
  }

  Estimate est = assemble(data, error, cfg, ctx, best_beta, best_profile, floor);
  est.diagnostics.multistarts = static_cast<int>(starts.size());
  est.diagnostics.multistart_spread = best_f - worst_f;
  est.diagnostics.outer_evals = total_evals;
  est.diagnostics.converged = best_converged && best_profile.converged;
  return est;
}

} // namespace

ProfileFit profile_hazard(const ProfileContext& ctx, const Eigen::VectorXd& beta,
                          const ErrorModel& error, const InnerConfig& config,
                          const std::vector<double>* warm_start) {
  ReducedObjective ro(ctx, beta, error);
  return maximize_profile(ro, config, warm_start);
}

ProfileResult profile_hazard(const Dataset& data, const Eigen::VectorXd& beta,
                             const ErrorModel& error, const FitConfig& config,
                             double floor) {
  ProfileContext ctx(data, config.lipschitz_L, config.tau, floor);
  ProfileFit pf = profile_hazard(ctx, beta, error, config.inner);
  SplineHazard hazard =
      tent_transform(ctx.knots(), pf.node_values, config.lipschitz_L, config.tau, floor);
  const ExtReal q = corrected_objective(data, hazard, beta, error);
  return ProfileResult{std::move(hazard), q.value(), pf.iterations, pf.converged};
}

Estimate fit_stage1(const Dataset& data, const ErrorModel& error, const FitConfig& config) {
  Estimate est = run_search(data, error, config, 0.0);
  est.stage = 1;
  return est;
}

Estimate fit_stage2(const Dataset& data, const ErrorModel& error, const Estimate& stage1,
                    const FitConfig& config) {
  check_inputs(data, error, config);
  if (stage1.stage != 1)
    throw usage_error("fit_stage2: the supplied estimate is not a stage-1 result");

  // The stage-1 knots must be exactly the distinct follow-up times of
  // this dataset, otherwise the estimate belongs to different data.
  ProfileContext ctx(data, config.lipschitz_L, config.tau, 0.0);
  const std::vector<double>& knots = stage1.hazard.knots();
  if (knots.size() != ctx.num_knots())
    throw usage_error("fit_stage2: stage-1 estimate does not match the data (knot count)");
  for (std::size_t k = 0; k < knots.size(); ++k)
    if (std::abs(knots[k] - ctx.knots()[k]) > 1e-12)
      throw usage_error("fit_stage2: stage-1 estimate does not match the data (knot values)");

  const double mu = stage1.hazard.min_value();
  if (mu <= 0.0) {
    Estimate est = stage1;
    est.stage = 2;
    est.diagnostics.stage1_min = mu;
    est.diagnostics.floor = 0.0;
    est.diagnostics.epsilon = config.epsilon.resolve(data.size());
    return est;
  }

  Estimate est = run_search(data, error, config, 0.5 * mu);
  est.stage = 2;
  est.diagnostics.stage1_min = mu;
  return est;
}

BruteForceResult brute_force_fit(const Dataset& data, const ErrorModel& error,
                                 const FitConfig& config, double grid_step, double floor) {
  check_inputs(data, error, config);
  if (data.size() > 4 || data.covariate_dim() > 2)
    throw usage_error("brute_force_fit: exhaustive search is limited to n <= 4, m <= 2");
  if (!(std::isfinite(grid_step) && grid_step > 0.0))
    throw usage_error("brute_force_fit: grid_step must be positive");
  if (!(std::isfinite(floor) && floor >= 0.0))
    throw usage_error("brute_force_fit: floor must be nonnegative");

  ProfileContext ctx(data, config.lipschitz_L, config.tau, floor);
  const std::size_t K = ctx.num_knots();
  const std::vector<int>& dcount = ctx.event_counts();
  const ParamBox& box = config.param_box;

  // Tensor grid over the parameter box, upper edge included.
  std::vector<Eigen::VectorXd> betas;
  {
    std::vector<std::vector<double>> axes(box.dim());
    for (Eigen::Index j = 0; j < box.dim(); ++j) {
      const double lo = box.lower[j], hi = box.upper[j];
      for (long i = 0;; ++i) {
        const double x = lo + i * grid_step;
        if (x >= hi - 1e-12) break;
        axes[j].push_back(x);
      }
      axes[j].push_back(hi);
    }
    std::vector<std::size_t> idx(box.dim(), 0);
    while (true) {
      Eigen::VectorXd b(box.dim());
      for (Eigen::Index j = 0; j < box.dim(); ++j) b[j] = axes[j][idx[j]];
      betas.push_back(b);
      Eigen::Index j = 0;
      for (; j < box.dim(); ++j) {
        if (++idx[j] < axes[j].size()) break;
        idx[j] = 0;
      }
      if (j == box.dim()) break;
    }
  }

  std::vector<ReducedObjective> objectives;
  objectives.reserve(betas.size());
  double rate_cap = 0.0;
  for (const Eigen::VectorXd& b : betas) {
    objectives.emplace_back(ctx, b, error);
    const double wt = objectives.back().weighted_time_total();
    if (wt > 0.0) rate_cap = std::max(rate_cap, ctx.total_events() / wt);
  }

  // Per-knot band widths in grid units; grid neighbors within dj steps
  // satisfy the Lipschitz constraint.
  std::vector<long> band_steps(K > 0 ? K - 1 : 0);
  for (std::size_t k = 0; k + 1 < K; ++k)
    band_steps[k] =
        static_cast<long>(std::floor(ctx.bands()[k] / grid_step * (1.0 + 1e-12)));

  double cap =
      floor + 3.0 * rate_cap + 2.0 * config.lipschitz_L * config.tau + 10.0 * grid_step;

  std::vector<double> v(K), best_v;
  std::size_t best_beta_idx = 0;
  double best_f = -std::numeric_limits<double>::infinity();
  std::uint64_t cells = 0;

  for (int attempt = 0; attempt < 8; ++attempt) {
    best_f = -std::numeric_limits<double>::infinity();
    best_v.clear();
    cells = 0;
    const long jmax = static_cast<long>(std::ceil((cap - floor) / grid_step));

    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      const ReducedObjective& ro = objectives[bi];
      std::vector<long> j(K, 0);
      // Depth-first walk over the pruned lattice, accumulating the
      // objective segment by segment so each leaf costs O(1).
      std::vector<double> partial(K, 0.0);
      std::size_t depth = 0;
      auto value_at = [&](long jj) { return floor + jj * grid_step; };
      auto min_index = [&](std::size_t k) -> long {
        return (dcount[k] > 0 && floor <= 0.0) ? 1 : 0;
      };
      j[0] = min_index(0) - 1;
      while (true) {
        ++j[depth];
        long hi = jmax;
        long lo = min_index(depth);
        if (depth > 0) {
          hi = std::min(hi, j[depth - 1] + band_steps[depth - 1]);
          lo = std::max(lo, j[depth - 1] - band_steps[depth - 1]);
          if (j[depth] < lo) j[depth] = lo;
        }
        if (j[depth] > hi) {
          if (depth == 0) break;
          --depth;
          continue;
        }
        v[depth] = value_at(j[depth]);
        double acc = depth > 0 ? partial[depth - 1] : 0.0;
        acc += ro.feasible_log_term(depth, v[depth]);
        acc += depth == 0 ? ro.feasible_boundary_term(v[0])
                          : ro.feasible_segment_term(depth - 1, v[depth - 1], v[depth]);
        partial[depth] = acc;
        if (depth + 1 < K) {
          ++depth;
          j[depth] = min_index(depth) - 1;
          continue;
        }
        ++cells;
        const double total = acc + ro.linear_term();
        if (total > best_f) {
          best_f = total;
          best_v = v;
          best_beta_idx = bi;
        }
      }
    }

    if (best_v.empty()) throw numeric_error("brute_force_fit: no feasible lattice point");
    double top = 0.0;
    for (double x : best_v) top = std::max(top, x);
    if (top <= cap - 2.0 * grid_step) break;
    if (attempt == 7) throw numeric_error("brute_force_fit: value cap did not stabilize");
    cap *= 2.0;
  }

  const Eigen::VectorXd& best_beta = betas[best_beta_idx];
  const ReducedObjective& best_ro = objectives[best_beta_idx];

  // Largest objective move across one grid cell around the optimum: the
  // honest resolution of the search, used as comparison slack.
  double cell_variation = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (double s : {-grid_step, grid_step}) {
      std::vector<double> vv = best_v;
      vv[k] += s;
      if (vv[k] < floor - 1e-15) continue;
      const double f = best_ro.value(vv);
      if (std::isfinite(f)) cell_variation = std::max(cell_variation, std::abs(best_f - f));
    }
  }
  for (Eigen::Index jdim = 0; jdim < box.dim(); ++jdim) {
    for (double s : {-grid_step, grid_step}) {
      Eigen::VectorXd b = best_beta;
      b[jdim] += s;
      if (b[jdim] < box.lower[jdim] - 1e-15 || b[jdim] > box.upper[jdim] + 1e-15) continue;
      ReducedObjective ro(ctx, b, error);
      const double f = ro.value(best_v);
      if (std::isfinite(f)) cell_variation = std::max(cell_variation, std::abs(best_f - f));
    }
  }

  SplineHazard hazard =
      tent_transform(ctx.knots(), best_v, config.lipschitz_L, config.tau, floor);
  const ExtReal q = corrected_objective(data, hazard, best_beta, error);
  Estimate est{std::move(hazard), best_beta, q.value(), floor > 0.0 ? 2 : 1, {}};
  est.diagnostics.epsilon = config.epsilon.resolve(data.size());
  est.diagnostics.floor = floor;
  est.diagnostics.converged = true;

  return BruteForceResult{std::move(est), cell_variation, cells};
}

} // namespace coxmec
