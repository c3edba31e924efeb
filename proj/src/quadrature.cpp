#include "coxmec/quadrature.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "coxmec/errors.hpp"

namespace coxmec {

std::vector<double> uniform_grid(double a, double b, std::size_t nodes) {
  if (nodes < 2) throw usage_error("uniform_grid: need at least 2 nodes");
  if (!(b > a)) throw usage_error("uniform_grid: need b > a");
  std::vector<double> g(nodes);
  const double h = (b - a) / static_cast<double>(nodes - 1);
  for (std::size_t i = 0; i < nodes; ++i) g[i] = a + h * static_cast<double>(i);
  g.back() = b;
  return g;
}

std::vector<double> simpson_weights(std::size_t nodes, double h) {
  if (nodes < 3 || nodes % 2 == 0)
    throw usage_error("simpson_weights: node count must be odd and at least 3");
  if (!(h > 0.0)) throw usage_error("simpson_weights: step must be positive");
  std::vector<double> w(nodes, h / 3.0);
  for (std::size_t i = 1; i + 1 < nodes; ++i) w[i] *= (i % 2 == 1) ? 4.0 : 2.0;
  return w;
}

double simpson(const std::vector<double>& values, double h) {
  const std::vector<double> w = simpson_weights(values.size(), h);
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += w[i] * values[i];
  return s;
}

void gauss_hermite_normal(int order, std::vector<double>& nodes,
                          std::vector<double>& weights) {
  if (order < 1) throw usage_error("gauss_hermite_normal: order must be positive");
  /*
   * Golub-Welsch on the Jacobi matrix of the Hermite polynomials for the
   * weight e^{-x^2}: zero diagonal, off-diagonal sqrt(k/2).  Eigenvalues
   * are the nodes; the weight is mu_0 times the squared first component
   * of the normalized eigenvector.  The change of variables z = sqrt(2) x
   * turns the rule into an expectation under N(0, 1), and mu_0 = sqrt(pi)
   * cancels against the normal density constant, leaving the squared
   * component alone.
   */
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double off = std::sqrt(0.5 * static_cast<double>(k));
    J(k, k - 1) = off;
    J(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success)
    throw numeric_error("gauss_hermite_normal: eigensolve failed");
  nodes.resize(static_cast<std::size_t>(order));
  weights.resize(static_cast<std::size_t>(order));
  const double sqrt2 = std::sqrt(2.0);
  for (int j = 0; j < order; ++j) {
    const double q = es.eigenvectors()(0, j);
    nodes[static_cast<std::size_t>(j)] = sqrt2 * es.eigenvalues()[j];
    weights[static_cast<std::size_t>(j)] = q * q;
  }
}

double panel_simpson(const std::vector<double>& edges,
                     const std::function<double(double)>& g) {
  if (edges.size() < 2) throw usage_error("panel_simpson: need at least 2 edges");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    if (b < a) throw usage_error("panel_simpson: edges must be nondecreasing");
    if (b == a) continue;
    s += (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
  }
  return s;
}

} // namespace coxmec
