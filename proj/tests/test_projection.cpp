#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "coxmec/chain_projection.hpp"
#include "coxmec/errors.hpp"
#include "coxmec/rng.hpp"

using namespace coxmec;

namespace {

bool feasible(const std::vector<double>& v, const std::vector<double>& lower,
              const std::vector<double>& band, double tol) {
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k] < lower[k] - tol) return false;
  for (std::size_t k = 0; k + 1 < v.size(); ++k)
    if (std::abs(v[k + 1] - v[k]) > band[k] + tol) return false;
  return true;
}

// Dykstra's alternating projection onto the intersection of the lower
// box with the pairwise band slabs: an independent (slow but provably
// convergent) oracle for the exact projection.
std::vector<double> dykstra(const std::vector<double>& z, const std::vector<double>& lower,
                            const std::vector<double>& band, int sweeps) {
  const std::size_t K = z.size();
  const std::size_t sets = K; // one box + K-1 slabs
  std::vector<std::vector<double>> inc(sets, std::vector<double>(K, 0.0));
  std::vector<double> x = z;
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t c = 0; c < sets; ++c) {
      std::vector<double> y(K);
      for (std::size_t k = 0; k < K; ++k) y[k] = x[k] + inc[c][k];
      std::vector<double> p = y;
      if (c == 0) {
        for (std::size_t k = 0; k < K; ++k) p[k] = std::max(y[k], lower[k]);
      } else {
        const std::size_t k = c - 1;
        const double diff = y[k + 1] - y[k];
        if (diff > band[k]) {
          const double shift = 0.5 * (diff - band[k]);
          p[k] += shift;
          p[k + 1] -= shift;
        } else if (diff < -band[k]) {
          const double shift = 0.5 * (-diff - band[k]);
          p[k] -= shift;
          p[k + 1] += shift;
        }
      }
      for (std::size_t k = 0; k < K; ++k) inc[c][k] = y[k] - p[k];
      x = p;
    }
  }
  return x;
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

} // namespace

TEST_SUITE("projection") {

TEST_CASE("two-point chains solve by hand") {
  // Unconstrained floor: the pair (0, 10) splits the slack evenly around
  // the band of width 1.
  std::vector<double> p = project_chain({0.0, 10.0}, {-1e30, -1e30}, {1.0});
  CHECK(p[0] == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(5.5).epsilon(1e-12));

  // Binding floor at 5 pins the left coordinate and drags the right one.
  p = project_chain({0.0, 10.0}, {5.0, 5.0}, {1.0});
  CHECK(p[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(6.0).epsilon(1e-12));

  // Zero band forces equality: the projection is the clamped average.
  p = project_chain({1.0, 3.0}, {0.0, 0.0}, {0.0});
  CHECK(p[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("feasible points are fixed points") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t K = 1 + static_cast<std::size_t>(rng.uniform(0.0, 9.0));
    std::vector<double> lower(K), band(K > 0 ? K - 1 : 0), v(K);
    for (std::size_t k = 0; k < K; ++k) lower[k] = rng.uniform(-1.0, 0.5);
    for (std::size_t k = 0; k + 1 < K; ++k) band[k] = rng.uniform(0.0, 1.0);
    v[0] = lower[0] + rng.uniform(0.0, 1.0);
    for (std::size_t k = 1; k < K; ++k) {
      const double lo = std::max(lower[k], v[k - 1] - band[k - 1]);
      const double hi = v[k - 1] + band[k - 1];
      if (lo > hi) {
        v[k] = lo; // band pinned by the floor; still feasible upward
        continue;
      }
      v[k] = rng.uniform(lo, hi);
    }
    if (!feasible(v, lower, band, 0.0)) continue;
    const std::vector<double> p = project_chain(v, lower, band);
    for (std::size_t k = 0; k < K; ++k) CHECK(p[k] == doctest::Approx(v[k]).epsilon(1e-12));
  }
}

TEST_CASE("matches the alternating-projection oracle on random instances") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t K = 2 + static_cast<std::size_t>(rng.uniform(0.0, 10.0));
    std::vector<double> z(K), lower(K), band(K - 1);
    for (std::size_t k = 0; k < K; ++k) z[k] = rng.uniform(-4.0, 4.0);
    for (std::size_t k = 0; k < K; ++k)
      lower[k] = rng.uniform() < 0.3 ? rng.uniform(-1.0, 1.0) : -1e30;
    for (std::size_t k = 0; k + 1 < K; ++k)
      band[k] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.05, 1.5);

    const std::vector<double> fast = project_chain(z, lower, band);
    REQUIRE(feasible(fast, lower, band, 1e-9));
    const std::vector<double> slow = dykstra(z, lower, band, 4000);
    for (std::size_t k = 0; k < K; ++k) CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(5e-7));

    // Variational inequality: no feasible direction improves on the
    // returned point, checked against random feasible witnesses.
    for (int w = 0; w < 20; ++w) {
      std::vector<double> cand(K);
      cand[0] = std::max(lower[0] > -1e29 ? lower[0] : -5.0, -5.0) + rng.uniform(0.0, 3.0);
      for (std::size_t k = 1; k < K; ++k) {
        double lo = cand[k - 1] - band[k - 1];
        double hi = cand[k - 1] + band[k - 1];
        if (lower[k] > -1e29) lo = std::max(lo, lower[k]);
        if (lo > hi) {
          cand[k] = lo;
          continue;
        }
        cand[k] = rng.uniform(lo, hi);
      }
      if (!feasible(cand, lower, band, 0.0)) continue;
      double ip = 0.0;
      for (std::size_t k = 0; k < K; ++k) ip += (z[k] - fast[k]) * (cand[k] - fast[k]);
      CHECK(ip <= 1e-8);
      CHECK(dist2(z, fast) <= dist2(z, cand) + 1e-8);
    }
  }
}

TEST_CASE("projection is nonexpansive") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t K = 3 + static_cast<std::size_t>(rng.uniform(0.0, 6.0));
    std::vector<double> z1(K), z2(K), lower(K, 0.0), band(K - 1);
    for (std::size_t k = 0; k < K; ++k) z1[k] = rng.uniform(-2.0, 2.0);
    for (std::size_t k = 0; k < K; ++k) z2[k] = rng.uniform(-2.0, 2.0);
    for (std::size_t k = 0; k + 1 < K; ++k) band[k] = rng.uniform(0.05, 0.8);
    const std::vector<double> p1 = project_chain(z1, lower, band);
    const std::vector<double> p2 = project_chain(z2, lower, band);
    CHECK(dist2(p1, p2) <= dist2(z1, z2) + 1e-10);
  }
}

TEST_CASE("size mismatches are usage errors") {
  CHECK_THROWS_AS(project_chain({1.0, 2.0}, {0.0}, {1.0}), usage_error);
  CHECK_THROWS_AS(project_chain({1.0, 2.0}, {0.0, 0.0}, {1.0, 1.0}), usage_error);
  CHECK_THROWS_AS(project_chain({1.0, 2.0}, {0.0, 0.0}, {-0.5}), usage_error);
}

} // TEST_SUITE("projection")
