#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace coxmec {

// Uniform grid of `nodes` points from a to b inclusive (nodes >= 2).
std::vector<double> uniform_grid(double a, double b, std::size_t nodes);

// Composite Simpson weights for a uniform grid with an odd number of
// nodes (>= 3) and step h: h/3 * (1, 4, 2, 4, ..., 4, 1).
std::vector<double> simpson_weights(std::size_t nodes, double h);

// Composite Simpson integral of tabulated values on a uniform grid.
double simpson(const std::vector<double>& values, double h);

// Gauss-Hermite rule of the given order rotated to the standard normal:
// E f(Z) = sum_j weights[j] f(nodes[j]) for Z ~ N(0, 1), exact for
// polynomials of degree < 2 * order.
void gauss_hermite_normal(int order, std::vector<double>& nodes,
                          std::vector<double>& weights);

// Integral of g over [edges.front(), edges.back()] by Simpson's rule on
// each consecutive panel, exact for integrands that are cubic between
// consecutive edges.  Edges must be nondecreasing.
double panel_simpson(const std::vector<double>& edges,
                     const std::function<double(double)>& g);

} // namespace coxmec
