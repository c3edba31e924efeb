#include "coxmec/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "coxmec/errors.hpp"
#include "coxmec/quadrature.hpp"

namespace coxmec {

Dataset sample_dataset(const Truth& truth, std::size_t n, std::uint64_t seed) {
  truth.validate();
  if (n == 0) throw usage_error("sample_dataset: need at least one record");
  Rng rng(seed);
  Dataset d;
  d.y.resize(n);
  d.delta.resize(n);
  d.w.resize(static_cast<Eigen::Index>(n), truth.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const TruthRecord rec = sample_record(truth, rng);
    d.y[i] = rec.y;
    d.delta[i] = rec.delta;
    d.w.row(static_cast<Eigen::Index>(i)) = rec.w;
  }
  return d;
}

double WeightFunction::operator()(double u) const {
  double acc = 0.0;
  for (std::size_t j = coefficients.size(); j-- > 0;) acc = acc * u + coefficients[j];
  return acc;
}

WeightFunction WeightFunction::one() { return {"one", {1.0}}; }

WeightFunction WeightFunction::identity() { return {"identity", {0.0, 1.0}}; }

namespace detail {

/*
 * sqrt(n) integral_0^tau (lambda_hat - lambda_0) f G_C du, exactly.
 * Both hazards are piecewise linear between their breakpoints and the
 * censor survival is piecewise linear with kinks at the ends of its
 * uniform component, so on each panel of the merged breakpoint grid the
 * integrand is a polynomial of degree 2 + deg f; Simpson per panel is
 * exact through cubics, covering the constant and identity weights.
 * The censor atom at tau sits on the boundary and carries no Lebesgue
 * mass, so the open-interval survival is the right factor throughout.
 */
double functional_statistic(const SplineHazard& fitted, const Truth& truth,
                            const WeightFunction& f, std::size_t n) {
  const double tau = truth.tau();
  std::vector<double> edges;
  edges.reserve(fitted.breakpoints().size() + truth.hazard0.breakpoints().size() + 4);
  edges.insert(edges.end(), fitted.breakpoints().begin(), fitted.breakpoints().end());
  edges.insert(edges.end(), truth.hazard0.breakpoints().begin(),
               truth.hazard0.breakpoints().end());
  for (double t : {truth.censor.uniform_lo(), truth.censor.uniform_hi()})
    if (t > 0.0 && t < tau) edges.push_back(t);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const auto integrand = [&](double u) {
    const double gc =
        u < tau ? truth.censor.survival(u, tau) : truth.censor.survival_left(u, tau);
    return (fitted(u) - truth.hazard0(u)) * f(u) * gc;
  };
  return std::sqrt(static_cast<double>(n)) * panel_simpson(edges, integrand);
}

} // namespace detail

} // namespace coxmec
