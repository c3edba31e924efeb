#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "coxmec/dataset.hpp"
#include "coxmec/error_model.hpp"
#include "coxmec/nelder_mead.hpp"
#include "coxmec/param_box.hpp"
#include "coxmec/profile_solver.hpp"
#include "coxmec/spline_hazard.hpp"

namespace coxmec {

// Tolerance eps_n within which the fitted pair must maximize the
// objective.  The default shrinks as c / n; a fixed absolute value is
// also accepted.
struct EpsilonRule {
  bool scale_with_n = true;
  double value = 1.0;

  double resolve(std::size_t n) const {
    return scale_with_n ? value / static_cast<double>(n == 0 ? 1 : n) : value;
  }
};

struct OuterConfig {
  int multistarts = 8; // box corners, midpoint, then seeded uniform draws
  NelderMeadConfig search;
};

struct FitConfig {
  double tau = 1.0;
  double lipschitz_L = 1.0;
  ParamBox param_box;
  EpsilonRule epsilon;
  InnerConfig inner;
  OuterConfig outer;
  std::uint64_t seed = 1;
};

struct FitDiagnostics {
  double epsilon = 0.0;           // resolved eps_n
  double floor = 0.0;             // hazard floor used by the profile
  double stage1_min = 0.0;        // min of the stage-1 hazard (stage 2 only)
  double multistart_spread = 0.0; // best minus worst branch objective
  int multistarts = 0;
  int outer_evals = 0;
  int inner_iterations = 0; // final profile solve
  int active_bounds = 0;    // beta coordinates pinned at the box boundary
  bool converged = false;
};

struct Estimate {
  SplineHazard hazard;
  Eigen::VectorXd beta;
  double objective = 0.0; // corrected objective at (hazard, beta)
  int stage = 1;
  FitDiagnostics diagnostics;
};

struct ProfileResult {
  SplineHazard hazard;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Hazard profile at fixed beta: the inner maximization alone.  The tent
// spline over the distinct follow-up times is returned with its node
// values maximizing the objective subject to values >= floor.
ProfileResult profile_hazard(const Dataset& data, const Eigen::VectorXd& beta,
                             const ErrorModel& error, const FitConfig& config,
                             double floor = 0.0);

// Low-level variant for callers that reuse the knot structure across many
// beta evaluations (the outer search does).
ProfileFit profile_hazard(const ProfileContext& ctx, const Eigen::VectorXd& beta,
                          const ErrorModel& error, const InnerConfig& config,
                          const std::vector<double>* warm_start = nullptr);

/*
 * Stage 1: joint maximization over the unconstrained shape cone and the
 * parameter box via multistart simplex search on the profiled objective.
 * An all-censored sample has the exact maximizer (lambda = 0, any beta);
 * the box midpoint is reported for beta.
 */
Estimate fit_stage1(const Dataset& data, const ErrorModel& error, const FitConfig& config);

/*
 * Stage 2: if the stage-1 hazard has minimum mu > 0, refit with the
 * hazard constrained to stay >= mu/2; otherwise the stage-1 estimate is
 * passed through unchanged (stage relabeled).  The supplied stage-1
 * estimate must come from the same data (knot sets are checked).
 */
Estimate fit_stage2(const Dataset& data, const ErrorModel& error, const Estimate& stage1,
                    const FitConfig& config);

/*
 * Exhaustive grid search oracle for tiny problems (n <= 4, m <= 2): node
 * values and beta on lattices of pitch grid_step, hazard lattice pruned
 * to the Lipschitz band, value cap grown until the optimum is interior.
 * cell_variation reports the largest objective change across one grid
 * cell around the optimum, the natural tolerance when comparing against
 * the continuous fit.
 */
struct BruteForceResult {
  Estimate estimate;
  double cell_variation = 0.0;
  std::uint64_t cells_visited = 0;
};

BruteForceResult brute_force_fit(const Dataset& data, const ErrorModel& error,
                                 const FitConfig& config, double grid_step,
                                 double floor = 0.0);

} // namespace coxmec
