#pragma once

#include <vector>

namespace coxmec {

/*
 * Exact Euclidean projection onto the discrete Lipschitz band
 *
 *   { v in R^K :  v_k >= lower_k,  |v_{k+1} - v_k| <= band_k }.
 *
 * Dynamic program over value functions g_k(x) = min over feasible
 * v_1..v_{k-1} with v_k = x of sum (v_j - z_j)^2 / 2.  Each g_k is convex
 * piecewise quadratic; its derivative is a nondecreasing piecewise-linear
 * function.  The band constraint turns g_k into an inf-convolution whose
 * derivative is the old one split at its root and shifted apart by band_k
 * (a pool-adjacent style flattening); adding the next quadratic adds the
 * line x - z_{k+1}.  A backward sweep through the stored roots recovers
 * the unique minimizer.
 *
 * The derivative's linear pieces live in two stacks split at the current
 * root, with the per-step shift and quadratic add applied lazily through
 * per-side counters, so a step costs O(1) plus the pieces the root walk
 * crosses.  Total cost is O(K^2) in the worst case (the root can recross
 * the same pieces), but O(K) for the near-monotone inputs the solver
 * produces; positions are exact up to an ulp of the accumulated shift.
 */
std::vector<double> project_chain(const std::vector<double>& z,
                                  const std::vector<double>& lower,
                                  const std::vector<double>& band);

} // namespace coxmec
