#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"

#include "coxmec/asymptotics.hpp"
#include "coxmec/errors.hpp"
#include "coxmec/quadrature.hpp"
#include "coxmec/rng.hpp"
#include "coxmec/truth.hpp"
#include "support.hpp"

using namespace coxmec;

namespace {

SplineHazard constant_hazard(double c, double tau = 1.0, double L = 1.0) {
  return SplineHazard(SplineHazard::Mode::Interp, tau, L, {0.0, tau}, {c, c});
}

Eigen::MatrixXd atom_matrix(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

// X identically zero: every X-weighted moment vanishes and b has the
// closed form E e^{-Lambda_0(t)}.
Truth x_zero_fixture() {
  return Truth{constant_hazard(1.0), testsup::vec1(0.0),
               CovariateLaw::finite_support(atom_matrix({0.0}), {1.0}),
               CensorLaw::at_tau(), ErrorModel::none(1)};
}

// X = +-1 with equal weight at beta0 = 0: a vanishes by symmetry while
// b, p stay positive.
Truth rademacher_fixture() {
  return Truth{constant_hazard(1.0), testsup::vec1(0.0),
               CovariateLaw::finite_support(atom_matrix({-1.0, 1.0}), {0.5, 0.5}),
               CensorLaw::at_tau(), ErrorModel::none(1)};
}

bool message_mentions(const std::exception& e, const std::string& tag) {
  return std::string(e.what()).find(tag) != std::string::npos;
}

// Expects validate() to throw and the message to cite the given
// condition label.
void check_violation(const Truth& truth, const std::string& tag) {
  try {
    truth.validate();
    FAIL_CHECK("validate() accepted a fixture violating " << tag);
  } catch (const usage_error& e) {
    CHECK_MESSAGE(message_mentions(e, tag), "missing " << tag << " in: " << e.what());
  }
}

} // namespace

TEST_CASE("uniform grid hits both endpoints exactly") {
  const std::vector<double> g = uniform_grid(0.0, 1.0, 11);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 1.0);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(g[i + 1] - g[i] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("composite Simpson integrates constants and cubics exactly") {
  const double h = 0.1;
  std::vector<double> c(11, 3.25);
  CHECK(simpson(c, h) == doctest::Approx(3.25).epsilon(1e-14));

  std::vector<double> cubic(11);
  for (int i = 0; i <= 10; ++i) {
    const double t = h * i;
    cubic[i] = 2.0 * t * t * t - t * t + 0.5 * t - 1.0;
  }
  // antiderivative t^4/2 - t^3/3 + t^2/4 - t at 1
  CHECK(simpson(cubic, h) ==
        doctest::Approx(0.5 - 1.0 / 3.0 + 0.25 - 1.0).epsilon(1e-14));
}

TEST_CASE("composite Simpson converges at fourth order on a quartic") {
  auto err = [](std::size_t nodes) {
    const double h = 1.0 / static_cast<double>(nodes - 1);
    std::vector<double> v(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      const double t = h * static_cast<double>(i);
      v[i] = t * t * t * t;
    }
    return std::abs(simpson(v, h) - 0.2);
  };
  const double e1 = err(11), e2 = err(21);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("Simpson rejects even node counts") {
  std::vector<double> v(10, 1.0);
  CHECK_THROWS_AS(simpson(v, 0.1), usage_error);
  CHECK_THROWS_AS(simpson_weights(4, 0.1), usage_error);
}

TEST_CASE("Gauss-Hermite rule reproduces standard normal moments") {
  std::vector<double> x, w;
  gauss_hermite_normal(16, x, w);
  REQUIRE(x.size() == 16);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s4 = 0.0, s6 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    s0 += w[j];
    s1 += w[j] * x[j];
    s2 += w[j] * x[j] * x[j];
    s4 += w[j] * std::pow(x[j], 4);
    s6 += w[j] * std::pow(x[j], 6);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(s1) < 1e-13);
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s4 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s6 == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("Gauss-Hermite rule integrates the moment generating function") {
  // E e^{tZ} = e^{t^2/2}; order 40 nails it far past double noise.
  std::vector<double> x, w;
  gauss_hermite_normal(40, x, w);
  for (double t : {0.3, 1.0, 2.5}) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * std::exp(t * x[j]);
    CHECK(s == doctest::Approx(std::exp(0.5 * t * t)).epsilon(1e-12));
  }
}

TEST_CASE("panel Simpson is exact on a piecewise cubic with kinks at edges") {
  // g(t) = t^3 on [0,1], (t-1)(2-t)+1 on [1,2]: smooth inside each panel.
  auto g = [](double t) {
    return t <= 1.0 ? t * t * t : (t - 1.0) * (2.0 - t) + 1.0;
  };
  const double exact = 0.25 + (1.0 / 6.0 + 1.0);
  CHECK(panel_simpson({0.0, 1.0, 2.0}, g) == doctest::Approx(exact).epsilon(1e-14));
  // refining the panel list must not change the value
  CHECK(panel_simpson({0.0, 0.5, 1.0, 1.25, 2.0}, g) ==
        doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("moment grids vanish on the degenerate X fixture") {
  const Truth truth = x_zero_fixture();
  const AsymptoticTables t = compute_tables(truth, 201);
  REQUIRE(t.grid.size() == 201);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double u = t.grid[i];
    CHECK(t.a[i].cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.p[i].cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.T[i].cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.b[i] == doctest::Approx(std::exp(-u)).epsilon(1e-13));
    CHECK(t.K[i] == doctest::Approx(std::exp(u)).epsilon(1e-12));
  }
  CHECK(t.A.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.M.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric two-atom X cancels a and gives the closed-form A and M") {
  const Truth truth = rademacher_fixture();
  const AsymptoticTables t = compute_tables(truth);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(std::abs(t.a[i][0]) < 1e-14);
    CHECK(t.b[i] == doctest::Approx(std::exp(-t.grid[i])).epsilon(1e-13));
    CHECK(t.T[i](0, 0) == doctest::Approx(std::exp(-2.0 * t.grid[i])).epsilon(1e-12));
  }
  // A = integral_0^1 e^{-u} du and M = integral e^{-2u} e^{u} du coincide.
  const double closed = 1.0 - std::exp(-1.0);
  CHECK(t.A(0, 0) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(t.M(0, 0) == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("gaussian covariate moments match a large Monte Carlo average") {
  const double mean = 0.2, sd = 0.5, beta = 0.5;
  Eigen::MatrixXd cov(1, 1);
  cov(0, 0) = sd * sd;
  const Truth truth{SplineHazard(SplineHazard::Mode::Interp, 1.0, 1.0, {0.0, 1.0},
                                 {0.5, 0.9}),
                    testsup::vec1(beta), CovariateLaw::gaussian(testsup::vec1(mean), cov),
                    CensorLaw::at_tau(), ErrorModel::none(1)};
  const AsymptoticTables t = compute_tables(truth, 201);

  Rng rng(404040);
  const int draws = 1000000;
  for (double target : {0.3, 0.8}) {
    // accumulate each moment with its second moment so the comparison
    // can use the realized Monte Carlo standard error
    double s[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
    const double lam0 = truth.hazard0.cumulative(target);
    for (int i = 0; i < draws; ++i) {
      const double x = mean + sd * rng.normal();
      const double g = std::exp(beta * x) * std::exp(-std::exp(beta * x) * lam0);
      const double obs[3] = {x * g, g, x * x * g};
      for (int k = 0; k < 3; ++k) {
        s[k] += obs[k];
        sq[k] += obs[k] * obs[k];
      }
    }
    // nearest grid point: 201 nodes on [0,1] puts 0.3 and 0.8 on the grid
    const std::size_t i = static_cast<std::size_t>(std::lround(target * 200.0));
    REQUIRE(t.grid[i] == doctest::Approx(target).epsilon(1e-12));
    const double table[3] = {t.a[i][0], t.b[i], t.p[i](0, 0)};
    for (int k = 0; k < 3; ++k) {
      const double m = s[k] / draws;
      const double se = std::sqrt((sq[k] / draws - m * m) / draws);
      CHECK(std::abs(table[k] - m) < 5.0 * se);
    }
  }
}

TEST_CASE("T is positive semidefinite along the default fixture grid") {
  const AsymptoticTables t = compute_tables(Truth::default_fixture(), 401);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(t.b[i] > 0.0);
    CHECK(t.T[i](0, 0) >= -1e-15);
  }
}

TEST_CASE("quadrature A agrees with its Monte Carlo evaluation") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables t = compute_tables(truth);
  const Eigen::MatrixXd mc = matrix_A_mc(truth, 1000000, 91);
  CHECK(t.A(0, 0) == doctest::Approx(mc(0, 0)).epsilon(0.01));
}

TEST_CASE("M is stable under grid refinement") {
  const Truth truth = Truth::default_fixture();
  const Eigen::MatrixXd coarse = compute_tables(truth, 1001).M;
  const Eigen::MatrixXd fine = compute_tables(truth, 2001).M;
  CHECK(std::abs(coarse(0, 0) - fine(0, 0)) < 1e-6 * (1.0 + std::abs(fine(0, 0))));
}

TEST_CASE("M integration reproduces a constant integrand exactly") {
  AsymptoticTables t;
  t.grid = uniform_grid(0.0, 1.0, 101);
  const std::size_t n = t.grid.size();
  t.lambda0.assign(n, 1.0);
  t.gc.assign(n, 1.0 / 3.0);
  t.b.assign(n, 1.0);
  t.K.assign(n, 1.5);
  Eigen::MatrixXd tmat(1, 1), pmat(1, 1);
  tmat(0, 0) = 2.0;
  pmat(0, 0) = 0.0;
  t.a.assign(n, Eigen::VectorXd::Zero(1));
  t.p.assign(n, pmat);
  t.T.assign(n, tmat);
  // integrand T K G_C = 2 * 1.5 / 3 = 1 at every point
  CHECK(matrix_M_from(t)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("b underflow is reported as a numeric failure") {
  // beta0' X = 700 drives e^{beta'X} Lambda(t) past the exp range, so
  // b(t) collapses to 0 * inf territory.
  const Truth truth{constant_hazard(1.0), testsup::vec1(700.0),
                    CovariateLaw::finite_support(atom_matrix({1.0}), {1.0}),
                    CensorLaw::at_tau(), ErrorModel::none(1)};
  CHECK_THROWS_AS(compute_tables(truth, 101), numeric_error);
}

TEST_CASE("sigma_beta vanishes when X and the error are degenerate at zero") {
  const Truth truth = x_zero_fixture();
  const AsymptoticTables t = compute_tables(truth, 201);
  const Eigen::MatrixXd s = sigma_beta(truth, t, 10000, 5);
  CHECK(s.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("sigma_beta enforces its replication floor") {
  const Truth truth = x_zero_fixture();
  const AsymptoticTables t = compute_tables(truth, 201);
  CHECK_THROWS_AS(sigma_beta(truth, t, 9999, 5), usage_error);
}

TEST_CASE("sigma_beta is reproducible across seeds up to Monte Carlo error") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables t = compute_tables(truth, 501);
  const double s1 = sigma_beta(truth, t, 20000, 11)(0, 0);
  const double s2 = sigma_beta(truth, t, 20000, 12)(0, 0);
  CHECK(s1 > 0.0);
  CHECK(s2 > 0.0);
  // two independent 2e4-draw estimates of a variance: a 10% gap is
  // roughly four standard errors for this fixture
  CHECK(std::abs(s1 - s2) < 0.1 * std::max(s1, s2));
}

TEST_CASE("sandwich with sigma equal to M inverts M") {
  Eigen::MatrixXd M(2, 2);
  M << 2.0, 0.3, 0.3, 1.0;
  const Eigen::MatrixXd s = sandwich_covariance(M, M);
  CHECK((s - M.inverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sandwich with zero sigma is zero and singular M throws") {
  Eigen::MatrixXd M(2, 2);
  M << 2.0, 0.3, 0.3, 1.0;
  CHECK(sandwich_covariance(M, Eigen::MatrixXd::Zero(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(sandwich_covariance(Eigen::MatrixXd::Zero(2, 2), M), numeric_error);
}

TEST_CASE("sandwich agrees with a direct two-solve evaluation") {
  Rng rng(777);
  Eigen::MatrixXd B(3, 3), S(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      B(i, j) = rng.uniform(-1.0, 1.0);
      S(i, j) = rng.uniform(-1.0, 1.0);
    }
  const Eigen::MatrixXd M = B * B.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd sig = S * S.transpose();
  const Eigen::MatrixXd direct = M.inverse() * sig * M.inverse();
  CHECK((sandwich_covariance(M, sig) - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Fredholm solve with zero weight function is identically zero") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables t = compute_tables(truth, 501);
  const std::vector<double> f(t.grid.size(), 0.0);
  const FredholmSolution sol = solve_fredholm(f, truth, t, 10000, 3);
  for (double v : sol.phi_lambda) CHECK(v == 0.0);
  CHECK(sol.phi_beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.sigma_sq == 0.0);
}

TEST_CASE("Fredholm solve decouples when a vanishes") {
  const Truth truth = rademacher_fixture();
  const AsymptoticTables t = compute_tables(truth, 501);
  std::vector<double> f(t.grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + 0.5 * t.grid[i];
  const FredholmSolution sol = solve_fredholm(f, truth, t, 10000, 3);
  CHECK(sol.phi_beta.cwiseAbs().maxCoeff() < 1e-12);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(sol.phi_lambda[i] == doctest::Approx(t.K[i] * f[i]).epsilon(1e-11));
}

TEST_CASE("Fredholm residual is tiny at the solution and grows off it") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables t = compute_tables(truth, 501);
  std::vector<double> f(t.grid.size(), 1.0);
  const FredholmSolution sol = solve_fredholm(f, truth, t, 10000, 3);
  const double res = fredholm_residual(f, sol.phi_lambda, t);
  CHECK(res < 1e-8);

  Rng rng(2024);
  std::vector<double> off = sol.phi_lambda;
  for (double& v : off) v += rng.uniform(0.5e-3, 1e-3) * (rng.uniform() < 0.5 ? -1 : 1);
  CHECK(fredholm_residual(f, off, t) > res);
  CHECK(fredholm_residual(f, off, t) > 1e-6);
}

TEST_CASE("functional variance is positive and stable under grid refinement") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables coarse = compute_tables(truth, 1001);
  const AsymptoticTables fine = compute_tables(truth, 2001);
  std::vector<double> fc(coarse.grid.size(), 1.0), ff(fine.grid.size(), 1.0);
  // common random numbers: identical draw streams on both grids, so the
  // difference isolates discretization error
  const FredholmSolution a = solve_fredholm(fc, truth, coarse, 20000, 77);
  const FredholmSolution b = solve_fredholm(ff, truth, fine, 20000, 77);
  CHECK(a.sigma_sq > 0.0);
  CHECK(std::abs(a.sigma_sq - b.sigma_sq) < 1e-3 * b.sigma_sq);
}

TEST_CASE("truth validation names each violated model condition") {
  const Truth good = Truth::default_fixture();
  CHECK_NOTHROW(good.validate());

  Truth bad1 = good; // hazard touching zero
  bad1.hazard0 =
      SplineHazard(SplineHazard::Mode::Interp, 1.0, 1.0, {0.0, 1.0}, {0.0, 0.4});
  check_violation(bad1, "(vii)");

  Truth bad2 = good; // censoring can hit zero
  bad2.censor = CensorLaw::uniform_mix(0.0, 1.0, 0.0);
  check_violation(bad2, "(x)");

  Truth bad3 = good; // degenerate covariate covariance
  bad3.x_law = CovariateLaw::finite_support(atom_matrix({0.3}), {1.0});
  check_violation(bad3, "(vi)");

  Truth bad4 = good; // slope saturates the Lipschitz constant
  bad4.hazard0 =
      SplineHazard(SplineHazard::Mode::Interp, 1.0, 1.0, {0.0, 1.0}, {0.1, 1.1});
  check_violation(bad4, "(ix)");

  Truth bad5 = good; // censoring support sticks out past tau
  bad5.censor = CensorLaw::uniform_mix(0.2, 1.5, 0.2);
  check_violation(bad5, "(v)");
}

TEST_CASE("interiority check flags beta0 on the box boundary") {
  const Truth truth = Truth::default_fixture();
  CHECK_NOTHROW(truth.check_interior(
      ParamBox(testsup::vec1(-0.5), testsup::vec1(2.0))));
  try {
    truth.check_interior(ParamBox(testsup::vec1(0.7), testsup::vec1(2.0)));
    FAIL_CHECK("boundary beta0 accepted");
  } catch (const usage_error& e) {
    CHECK_MESSAGE(message_mentions(e, "(viii)"), "got: " << e.what());
  }
}

TEST_CASE("default fixture tables have the documented censor endpoints") {
  const Truth truth = Truth::default_fixture();
  const AsymptoticTables t = compute_tables(truth, 501);
  CHECK(t.gc.front() == 1.0);
  // left limit at tau keeps the atom: P(C >= tau) = 0.2
  CHECK(t.gc.back() == doctest::Approx(0.2).epsilon(1e-14));
  // before the uniform support starts, only certainty: P(C > 0.1) = 1
  CHECK(t.gc[50] == doctest::Approx(1.0).epsilon(1e-14));
}
