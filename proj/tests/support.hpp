#pragma once

// Shared fixtures for the unit suites: tiny vector literals, random cone
// members, and random small datasets.

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "coxmec/dataset.hpp"
#include "coxmec/rng.hpp"
#include "coxmec/spline_hazard.hpp"

namespace testsup {

inline Eigen::VectorXd vec1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

// Random member of the shape class agreeing with the tent at its knots:
// a Lipschitz random walk pinned to the node values, linearly
// interpolated on a fine grid.  Any such function dominates the tent
// pointwise.
inline coxmec::SplineHazard random_cone_function(const coxmec::SplineHazard& tent,
                                                 coxmec::Rng& rng, int substeps) {
  const double L = tent.lipschitz();
  const double tau = tent.tau();
  const std::vector<double>& kts = tent.knots();
  const std::vector<double>& val = tent.values();

  std::vector<double> gt, gv;
  auto walk = [&](double t0, double v0, double t1, double v1, bool pin_right) {
    gt.push_back(t0);
    gv.push_back(v0);
    double tprev = t0, vprev = v0;
    for (int s = 1; s < substeps; ++s) {
      const double t = t0 + (t1 - t0) * s / substeps;
      const double dt = t - tprev;
      double lo = std::max(0.0, vprev - L * dt);
      double hi = vprev + L * dt;
      if (pin_right) {
        lo = std::max(lo, v1 - L * (t1 - t));
        hi = std::min(hi, v1 + L * (t1 - t));
      }
      const double v = rng.uniform(lo, hi);
      gt.push_back(t);
      gv.push_back(v);
      tprev = t;
      vprev = v;
    }
  };

  if (kts.front() > 0.0) {
    std::vector<double> bt, bv;
    double tprev = kts.front(), vprev = val.front();
    for (int s = 1; s <= substeps; ++s) {
      const double t = kts.front() * (1.0 - static_cast<double>(s) / substeps);
      const double dt = tprev - t;
      const double v = rng.uniform(std::max(0.0, vprev - L * dt), vprev + L * dt);
      bt.push_back(t);
      bv.push_back(v);
      tprev = t;
      vprev = v;
    }
    for (std::size_t i = bt.size(); i-- > 0;) {
      gt.push_back(bt[i]);
      gv.push_back(bv[i]);
    }
  }
  for (std::size_t k = 0; k + 1 < kts.size(); ++k)
    walk(kts[k], val[k], kts[k + 1], val[k + 1], true);
  gt.push_back(kts.back());
  gv.push_back(val.back());
  if (kts.back() < tau) {
    double tprev = kts.back(), vprev = val.back();
    for (int s = 1; s <= substeps; ++s) {
      const double t = kts.back() + (tau - kts.back()) * s / substeps;
      const double dt = t - tprev;
      const double v = rng.uniform(std::max(0.0, vprev - L * dt), vprev + L * dt);
      gt.push_back(t);
      gv.push_back(v);
      tprev = t;
      vprev = v;
    }
  }
  return coxmec::SplineHazard(coxmec::SplineHazard::Mode::Interp, tau, L, gt, gv);
}

// Random band-feasible node values over the given knots.
inline std::vector<double> random_feasible_values(const std::vector<double>& knots,
                                                  double L, coxmec::Rng& rng,
                                                  double lo = 0.05, double hi = 1.5) {
  std::vector<double> v(knots.size());
  v[0] = rng.uniform(lo, hi);
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double band = L * (knots[k] - knots[k - 1]);
    const double a = std::max(lo, v[k - 1] - band);
    const double b = std::min(hi, v[k - 1] + band);
    v[k] = a < b ? rng.uniform(a, b) : std::clamp(v[k - 1], lo, hi);
  }
  return v;
}

// Random tiny dataset on [0, tau] with one covariate.
inline coxmec::Dataset random_dataset(std::size_t n, double tau, coxmec::Rng& rng,
                                      double event_prob = 0.7) {
  coxmec::Dataset d;
  d.w = Eigen::MatrixXd(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    d.y.push_back(rng.uniform(0.05, tau));
    d.delta.push_back(rng.uniform() < event_prob ? 1 : 0);
    d.w(i, 0) = rng.uniform(-1.0, 1.0);
  }
  return d;
}

} // namespace testsup
