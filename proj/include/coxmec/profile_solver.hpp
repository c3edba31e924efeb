#pragma once

#include <vector>

#include "coxmec/reduced_objective.hpp"

namespace coxmec {

struct InnerConfig {
  int max_iterations = 800;
  double objective_tol = 1e-11; // relative objective change at an accepted step
  double step_tol = 1e-9;       // relative residual of a reference projected step
};

struct ProfileFit {
  std::vector<double> node_values; // band-feasible canonical values
  double objective = 0.0;          // reduced objective at node_values
  int iterations = 0;
  bool converged = false;
};

/*
 * Maximizes the reduced objective over the band-feasible node values by
 * projected gradient ascent with Barzilai-Borwein steps and Armijo
 * backtracking along the projection arc, projecting with the exact chain
 * projection each step.  The ascent surface is the local (adjacent-knot)
 * form of the objective, which is concave and continuously differentiable,
 * so the monotone line search cannot jam and first-order stationarity
 * certifies the constrained maximum.
 */
ProfileFit maximize_profile(const ReducedObjective& objective, const InnerConfig& config,
                            const std::vector<double>* warm_start = nullptr);

} // namespace coxmec
