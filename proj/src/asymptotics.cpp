#include "coxmec/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "coxmec/errors.hpp"
#include "coxmec/quadrature.hpp"
#include "coxmec/rng.hpp"

namespace coxmec {

namespace {

// Linear interpolation of values tabulated on a uniform grid, clamped
// at the ends.
double interp(const std::vector<double>& grid, const std::vector<double>& vals,
              double t) {
  if (t <= grid.front()) return vals.front();
  if (t >= grid.back()) return vals.back();
  const double s = (t - grid.front()) / (grid.back() - grid.front()) *
                   static_cast<double>(grid.size() - 1);
  std::size_t i = static_cast<std::size_t>(s);
  if (i > grid.size() - 2) i = grid.size() - 2;
  const double frac = s - static_cast<double>(i);
  return vals[i] * (1.0 - frac) + vals[i + 1] * frac;
}

// Cumulative trapezoid integral of tabulated values, evaluated at the
// grid nodes.
std::vector<double> prefix_trapezoid(const std::vector<double>& grid,
                                     const std::vector<double>& vals) {
  std::vector<double> p(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    p[i] = p[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (vals[i] + vals[i - 1]);
  return p;
}

// integral_0^t of the tabulated integrand, extending the trapezoid rule
// into the partial segment containing t.
double prefix_at(const std::vector<double>& grid, const std::vector<double>& vals,
                 const std::vector<double>& prefix, double t) {
  if (t <= grid.front()) return 0.0;
  if (t >= grid.back()) return prefix.back();
  const double s = (t - grid.front()) / (grid.back() - grid.front()) *
                   static_cast<double>(grid.size() - 1);
  std::size_t i = static_cast<std::size_t>(s);
  if (i > grid.size() - 2) i = grid.size() - 2;
  const double frac = s - static_cast<double>(i);
  const double vt = vals[i] * (1.0 - frac) + vals[i + 1] * frac;
  return prefix[i] + 0.5 * (t - grid[i]) * (vals[i] + vt);
}

void check_tables(const AsymptoticTables& t) {
  const std::size_t n = t.grid.size();
  if (n < 3 || n % 2 == 0)
    throw usage_error("AsymptoticTables: grid must be uniform with an odd node "
                      "count of at least 3");
  if (t.b.size() != n || t.K.size() != n || t.a.size() != n || t.p.size() != n ||
      t.T.size() != n || t.gc.size() != n || t.lambda0.size() != n)
    throw usage_error("AsymptoticTables: all grid functions must share the grid size");
}

// Shared state of the Monte Carlo variance estimators: the error-model
// moments at beta0 and the exp(beta0'W) weighting of each draw.
struct DrawContext {
  double mgf;
  Eigen::VectorXd mgf_moment;

  explicit DrawContext(const Truth& truth)
      : mgf(truth.error.mgf(truth.beta0)),
        mgf_moment(truth.error.mgf_moment(truth.beta0)) {
    if (!(mgf > 0.0) || !std::isfinite(mgf) || !mgf_moment.allFinite())
      throw numeric_error("error-model moments at beta0 are degenerate");
  }
};

} // namespace

AsymptoticTables compute_tables(const Truth& truth, std::size_t grid_nodes) {
  if (grid_nodes < 3 || grid_nodes % 2 == 0)
    throw usage_error("compute_tables: grid_nodes must be odd and at least 3");

  const Eigen::Index d = truth.dim();
  const Eigen::MatrixXd& nodes = truth.x_law.nodes();
  const std::vector<double>& wts = truth.x_law.weights();

  // per covariate node: the fixed factor w_j e^{beta0'x_j}
  std::vector<double> factor(wts.size());
  for (Eigen::Index j = 0; j < nodes.rows(); ++j)
    factor[static_cast<std::size_t>(j)] =
        wts[static_cast<std::size_t>(j)] * std::exp(nodes.row(j).dot(truth.beta0));

  AsymptoticTables t;
  t.grid = uniform_grid(0.0, truth.tau(), grid_nodes);
  t.lambda0.resize(grid_nodes);
  t.gc.resize(grid_nodes);
  t.b.resize(grid_nodes);
  t.K.resize(grid_nodes);
  t.a.assign(grid_nodes, Eigen::VectorXd::Zero(d));
  t.p.assign(grid_nodes, Eigen::MatrixXd::Zero(d, d));
  t.T.assign(grid_nodes, Eigen::MatrixXd::Zero(d, d));

  for (std::size_t i = 0; i < grid_nodes; ++i) {
    const double u = t.grid[i];
    const double lam_cum = truth.hazard0.cumulative(u);

    double b = 0.0;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < nodes.rows(); ++j) {
      const double fj = factor[static_cast<std::size_t>(j)];
      if (fj == 0.0) continue;
      const double g = fj * std::exp(-std::exp(nodes.row(j).dot(truth.beta0)) * lam_cum);
      const Eigen::VectorXd x = nodes.row(j).transpose();
      b += g;
      a += g * x;
      p += g * x * x.transpose();
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
      std::ostringstream os;
      os << "compute_tables: b(t) degenerated to " << b << " at t = " << u
         << "; exp(beta0'X) overwhelms the double range for this truth";
      throw numeric_error(os.str());
    }

    t.lambda0[i] = truth.hazard0(u);
    t.gc[i] = i + 1 == grid_nodes ? truth.censor.survival_left(u, truth.tau())
                                  : truth.censor.survival(u, truth.tau());
    t.b[i] = b;
    t.K[i] = t.lambda0[i] / b;
    t.a[i] = a;
    t.p[i] = p;
    t.T[i] = p * b - a * a.transpose();
  }

  t.A = matrix_A_from(t);
  t.M = matrix_M_from(t);
  return t;
}

Eigen::MatrixXd matrix_A_from(const AsymptoticTables& t) {
  check_tables(t);
  const std::vector<double> w = simpson_weights(t.grid.size(), t.grid[1] - t.grid[0]);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(t.a[0].size(), t.a[0].size());
  for (std::size_t i = 0; i < t.grid.size(); ++i)
    A += w[i] * t.lambda0[i] * t.gc[i] * t.p[i];
  return A;
}

Eigen::MatrixXd matrix_M_from(const AsymptoticTables& t) {
  check_tables(t);
  const std::vector<double> w = simpson_weights(t.grid.size(), t.grid[1] - t.grid[0]);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(t.a[0].size(), t.a[0].size());
  for (std::size_t i = 0; i < t.grid.size(); ++i)
    M += w[i] * t.K[i] * t.gc[i] * t.T[i];
  return M;
}

Eigen::MatrixXd matrix_A_mc(const Truth& truth, int reps, std::uint64_t seed) {
  if (reps < 1) throw usage_error("matrix_A_mc: reps must be positive");
  const Eigen::Index d = truth.dim();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < reps; ++i) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(i)));
    const TruthRecord rec = sample_record(truth, rng);
    sum += std::exp(truth.beta0.dot(rec.x)) * truth.hazard0.cumulative(rec.y) * rec.x *
           rec.x.transpose();
  }
  return sum / static_cast<double>(reps);
}

Eigen::MatrixXd sigma_beta(const Truth& truth, const AsymptoticTables& tables, int reps,
                           std::uint64_t seed) {
  if (reps < 10000)
    throw usage_error("sigma_beta: need at least 10000 Monte Carlo replications");
  check_tables(tables);
  const Eigen::Index d = truth.dim();
  if (tables.a[0].size() != d)
    throw usage_error("sigma_beta: tables dimension must match the truth");
  const DrawContext ctx(truth);

  // componentwise prefix integrals of a(u) K(u)
  std::vector<std::vector<double>> ak(static_cast<std::size_t>(d)),
      ak_prefix(static_cast<std::size_t>(d));
  for (Eigen::Index k = 0; k < d; ++k) {
    std::vector<double>& col = ak[static_cast<std::size_t>(k)];
    col.resize(tables.grid.size());
    for (std::size_t i = 0; i < tables.grid.size(); ++i)
      col[i] = tables.a[i][k] * tables.K[i];
    ak_prefix[static_cast<std::size_t>(k)] = prefix_trapezoid(tables.grid, col);
  }

  const Eigen::MatrixXd& nodes = truth.x_law.nodes();
  const std::vector<double>& wts = truth.x_law.weights();

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < reps; ++r) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r)));
    const TruthRecord rec = sample_record(truth, rng);
    const double lam_cum = truth.hazard0.cumulative(rec.y);

    // a(Y) and b(Y) by exact node sums so only the prefix integral is
    // interpolated
    double by = 0.0;
    Eigen::VectorXd ay = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < nodes.rows(); ++j) {
      const double e = std::exp(nodes.row(j).dot(truth.beta0));
      const double g = wts[static_cast<std::size_t>(j)] * e * std::exp(-e * lam_cum);
      by += g;
      ay += g * nodes.row(j).transpose();
    }

    const double ew = std::exp(truth.beta0.dot(rec.w));
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(d);
    if (rec.delta) zeta -= ay / by;
    for (Eigen::Index k = 0; k < d; ++k)
      zeta[k] += ew / ctx.mgf *
                 prefix_at(tables.grid, ak[static_cast<std::size_t>(k)],
                           ak_prefix[static_cast<std::size_t>(k)], rec.y);
    if (rec.delta) zeta += rec.w;
    zeta -= (ctx.mgf * rec.w - ctx.mgf_moment) / (ctx.mgf * ctx.mgf) * (ew * lam_cum);

    sum += zeta;
    outer += zeta * zeta.transpose();
  }

  const double n = static_cast<double>(reps);
  const Eigen::MatrixXd cov = (outer - sum * sum.transpose() / n) / (n - 1.0);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd sandwich_covariance(const Eigen::MatrixXd& M,
                                    const Eigen::MatrixXd& sigma) {
  if (M.rows() != M.cols() || sigma.rows() != sigma.cols() || M.rows() != sigma.rows())
    throw usage_error("sandwich_covariance: M and sigma must be square and conformable");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw numeric_error("M is singular; the asymptotic covariance of the parameter "
                        "estimate requires nonsingular M");
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd s = inv * sigma * inv;
  return 0.5 * (s + s.transpose());
}

FredholmSolution solve_fredholm(const std::vector<double>& f, const Truth& truth,
                                const AsymptoticTables& tables, int reps,
                                std::uint64_t seed) {
  check_tables(tables);
  if (f.size() != tables.grid.size())
    throw usage_error("solve_fredholm: f must be tabulated on the tables grid");
  if (reps < 10000)
    throw usage_error("solve_fredholm: need at least 10000 Monte Carlo replications");
  const Eigen::Index d = truth.dim();
  if (tables.a[0].size() != d)
    throw usage_error("solve_fredholm: tables dimension must match the truth");
  const DrawContext ctx(truth);
  const std::size_t n = tables.grid.size();

  /*
   * Finite-rank reduction: with phi = K (f + a'c) the equation
   * phi/K - a' A^{-1} m(phi) = f collapses to the d x d linear system
   * (A - S) c = v, where
   *   S = integral K a a' G_C du,  v = integral K f a G_C du,
   * because m(phi) = v + S c and A c must equal m(phi).
   */
  const std::vector<double> w = simpson_weights(n, tables.grid[1] - tables.grid[0]);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = w[i] * tables.K[i] * tables.gc[i];
    S += c * tables.a[i] * tables.a[i].transpose();
    v += c * f[i] * tables.a[i];
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu_a(tables.A);
  if (!lu_a.isInvertible())
    throw numeric_error("A is singular; the weight equation needs nondegenerate "
                        "covariate moments");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(tables.A - S);
  if (!lu.isInvertible())
    throw numeric_error("A - S is singular; the weight equation has no unique solution");
  const Eigen::VectorXd c = lu.solve(v);

  FredholmSolution sol;
  sol.phi_lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    sol.phi_lambda[i] = tables.K[i] * (f[i] + tables.a[i].dot(c));
  sol.phi_beta = -c;
  sol.m_phi = v + S * c;

  /*
   * CLT variance of the estimated linear functional: the influence of
   * one observation on the criterion derivative along (phi_lambda,
   * phi_beta) is
   *   Z = Delta phi_lambda(Y)/lambda_0(Y)
   *       - (e^{beta0'W}/M_U) integral_0^Y phi_lambda du
   *       + Delta phi_beta'W
   *       - phi_beta'(M_U W - E U e^{beta0'U}) / M_U^2 e^{beta0'W}
   *         integral_0^Y lambda_0 du
   * and sigma_sq = Var(Z).
   */
  const std::vector<double> phi_prefix = prefix_trapezoid(tables.grid, sol.phi_lambda);
  double s1 = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r)));
    const TruthRecord rec = sample_record(truth, rng);
    const double lam_cum = truth.hazard0.cumulative(rec.y);
    const double ew = std::exp(truth.beta0.dot(rec.w));

    double z = -ew / ctx.mgf * prefix_at(tables.grid, sol.phi_lambda, phi_prefix, rec.y);
    if (rec.delta)
      z += interp(tables.grid, sol.phi_lambda, rec.y) / truth.hazard0(rec.y) +
           sol.phi_beta.dot(rec.w);
    z -= sol.phi_beta.dot(ctx.mgf * rec.w - ctx.mgf_moment) / (ctx.mgf * ctx.mgf) * ew *
         lam_cum;

    s1 += z;
    s2 += z * z;
  }
  const double nn = static_cast<double>(reps);
  sol.sigma_sq = (s2 - s1 * s1 / nn) / (nn - 1.0);
  return sol;
}

double fredholm_residual(const std::vector<double>& f,
                         const std::vector<double>& phi_lambda,
                         const AsymptoticTables& tables) {
  check_tables(tables);
  const std::size_t n = tables.grid.size();
  if (f.size() != n || phi_lambda.size() != n)
    throw usage_error("fredholm_residual: f and phi_lambda must live on the tables grid");

  const std::vector<double> w = simpson_weights(n, tables.grid[1] - tables.grid[0]);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(tables.a[0].size());
  for (std::size_t i = 0; i < n; ++i)
    m += w[i] * phi_lambda[i] * tables.gc[i] * tables.a[i];

  Eigen::FullPivLU<Eigen::MatrixXd> lu(tables.A);
  if (!lu.isInvertible())
    throw numeric_error("A is singular; the weight equation needs nondegenerate "
                        "covariate moments");
  const Eigen::VectorXd am = lu.solve(m);

  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    res = std::max(res,
                   std::abs(phi_lambda[i] / tables.K[i] - tables.a[i].dot(am) - f[i]));
  return res;
}

} // namespace coxmec
