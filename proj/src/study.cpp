#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "coxmec/errors.hpp"
#include "coxmec/simulation.hpp"

namespace coxmec {

namespace {

// Runs body(0..count-1) on up to `threads` workers pulling indices from a
// shared counter.  Bodies write to disjoint slots and own their error
// handling, so the result is identical for any worker count.
template <typename F>
void parallel_for(int count, int threads, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) return 0.0;
  const double pos = p * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

Quantiles quantiles_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, 0.25), quantile_sorted(v, 0.5), quantile_sorted(v, 0.75)};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Inverse normal CDF: Acklam's rational approximation polished with one
// Newton step through the exact CDF.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * 2.5066282746310002 * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

// Anderson-Darling statistic of a standardized sorted sample, with the
// finite-sample modification for the case where both mean and variance
// were estimated; the 1% critical value of the modified form is 1.035.
double anderson_darling(const std::vector<double>& z_sorted) {
  const std::size_t n = z_sorted.size();
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p1 = std::clamp(normal_cdf(z_sorted[i]), 1e-300, 1.0 - 1e-16);
    const double p2 =
        std::clamp(normal_cdf(z_sorted[n - 1 - i]), 1e-300, 1.0 - 1e-16);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(p1) + std::log1p(-p2));
  }
  const double nn = static_cast<double>(n);
  const double a2 = -nn - acc / nn;
  return a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
}

void check_common(const StudyConfig& cfg, std::size_t min_sizes) {
  cfg.truth.validate();
  cfg.truth.check_interior(cfg.fit.param_box);
  if (cfg.sizes.size() < min_sizes)
    throw usage_error("study: need at least " + std::to_string(min_sizes) +
                      " sample sizes");
  for (std::size_t s = 0; s + 1 < cfg.sizes.size(); ++s)
    if (cfg.sizes[s] >= cfg.sizes[s + 1])
      throw usage_error("study: sample sizes must be strictly increasing");
  if (cfg.sizes.front() == 0) throw usage_error("study: sample sizes must be positive");
  if (cfg.replications < 1) throw usage_error("study: need at least one replication");
  if (cfg.fit.tau != cfg.truth.tau())
    throw usage_error("study: fit config tau must equal the truth tau");
  if (cfg.threads < 1) throw usage_error("study: thread count must be positive");
}

// Fits one replicate and fills the row; exceptions become failure marks.
template <typename FitOnce>
void run_size(const StudyConfig& cfg, std::size_t size_index, StudyReport& report,
              FitOnce&& fit_once) {
  const std::size_t n = cfg.sizes[size_index];
  const int R = cfg.replications;
  std::vector<ReplicateRow> rows(static_cast<std::size_t>(R));
  parallel_for(R, cfg.threads, [&](int r) {
    ReplicateRow& row = rows[static_cast<std::size_t>(r)];
    row.n = n;
    row.rep = r;
    try {
      const std::uint64_t rr = static_cast<std::uint64_t>(r);
      const Dataset data =
          sample_dataset(cfg.truth, n, substream_seed(cfg.seed, size_index, 3 * rr));
      FitConfig fc = cfg.fit;
      fc.seed = substream_seed(cfg.seed, size_index, 3 * rr + 1);
      fit_once(data, fc, row);
      if (!row.beta.allFinite() || !std::isfinite(row.supnorm_full))
        throw numeric_error("replicate produced a non-finite estimate");
    } catch (const std::exception& e) {
      row.failed = true;
      row.failure = e.what();
    }
  });

  int failures = 0;
  for (const ReplicateRow& row : rows)
    if (row.failed) ++failures;
  if (10 * failures > R)
    throw numeric_error("study: " + std::to_string(failures) + " of " +
                        std::to_string(R) + " replicates failed at n = " +
                        std::to_string(n));

  SizeSummary summary;
  summary.n = n;
  summary.replications = R;
  summary.failures = failures;
  std::vector<double> full, trim, berr;
  for (const ReplicateRow& row : rows) {
    if (row.failed) continue;
    full.push_back(row.supnorm_full);
    trim.push_back(row.supnorm_trim);
    berr.push_back((row.beta - cfg.truth.beta0).norm());
  }
  if (full.size() < 2) report.low_replication = true;
  summary.supnorm_full = quantiles_of(full);
  summary.supnorm_trim = quantiles_of(trim);
  summary.beta_error = quantiles_of(berr);

  report.sizes.push_back(std::move(summary));
  for (ReplicateRow& row : rows) report.rows.push_back(std::move(row));
}

// Normality diagnostics of the scaled parameter errors; fills the tail
// of the size summary from the successful rows of one size.
void fill_normality_diagnostics(const StudyConfig& cfg, std::size_t size_index,
                                StudyReport& report) {
  SizeSummary& summary = report.sizes[size_index];
  const std::size_t n = summary.n;
  const Eigen::Index d = cfg.truth.dim();
  const double root_n = std::sqrt(static_cast<double>(n));

  std::vector<Eigen::VectorXd> z;
  std::vector<std::vector<double>> fvals(cfg.weight_functions.size());
  for (const ReplicateRow& row : report.rows) {
    if (row.n != n || row.failed) continue;
    z.push_back(root_n * (row.beta - cfg.truth.beta0));
    for (std::size_t j = 0; j < cfg.weight_functions.size(); ++j)
      fvals[j].push_back(row.functional[j]);
  }
  const std::size_t R = z.size();

  summary.scaled_mean = Eigen::VectorXd::Zero(d);
  summary.scaled_covariance = Eigen::MatrixXd::Zero(d, d);
  summary.skewness = Eigen::VectorXd::Zero(d);
  summary.excess_kurtosis = Eigen::VectorXd::Zero(d);
  summary.anderson_darling = Eigen::VectorXd::Zero(d);
  for (const Eigen::VectorXd& zi : z) summary.scaled_mean += zi;
  if (R > 0) summary.scaled_mean /= static_cast<double>(R);
  if (R > 1) {
    for (const Eigen::VectorXd& zi : z) {
      const Eigen::VectorXd c = zi - summary.scaled_mean;
      summary.scaled_covariance += c * c.transpose();
    }
    summary.scaled_covariance /= static_cast<double>(R - 1);
  }

  for (Eigen::Index k = 0; k < d; ++k) {
    if (R < 2) break;
    std::vector<double> zs;
    zs.reserve(R);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const Eigen::VectorXd& zi : z) {
      const double c = zi[k] - summary.scaled_mean[k];
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
    }
    m2 /= static_cast<double>(R);
    m3 /= static_cast<double>(R);
    m4 /= static_cast<double>(R);
    if (m2 > 0.0) {
      summary.skewness[k] = m3 / std::pow(m2, 1.5);
      summary.excess_kurtosis[k] = m4 / (m2 * m2) - 3.0;
      const double sd = std::sqrt(m2);
      for (const Eigen::VectorXd& zi : z)
        zs.push_back((zi[k] - summary.scaled_mean[k]) / sd);
      std::sort(zs.begin(), zs.end());
      summary.anderson_darling[k] = anderson_darling(zs);
      if (k == 0) {
        double gap = 0.0;
        for (int i = 1; i <= 19; ++i) {
          const double p = 0.05 * i;
          gap = std::max(gap,
                         std::abs(quantile_sorted(zs, p) - normal_quantile(p)));
        }
        summary.qq_discrepancy = gap;
      }
    }
  }

  for (std::size_t j = 0; j < cfg.weight_functions.size(); ++j) {
    FunctionalSummary fs;
    fs.name = cfg.weight_functions[j].name;
    double s1 = 0.0, s2 = 0.0;
    for (double v : fvals[j]) {
      s1 += v;
      s2 += v * v;
    }
    if (R > 0) fs.mean = s1 / static_cast<double>(R);
    if (R > 1)
      fs.empirical_variance =
          (s2 - s1 * s1 / static_cast<double>(R)) / static_cast<double>(R - 1);
    summary.functionals.push_back(std::move(fs));
  }
}

void fill_trends(StudyReport& report) {
  std::vector<double> logn, trim, berr;
  for (const SizeSummary& s : report.sizes) {
    logn.push_back(std::log(static_cast<double>(s.n)));
    trim.push_back(s.supnorm_trim.median);
    berr.push_back(s.beta_error.median);
  }
  const std::size_t S = logn.size();
  report.supnorm_trim_decreasing = S >= 2;
  report.beta_error_decreasing = S >= 2;
  for (std::size_t s = 0; s + 1 < S; ++s) {
    if (!(trim[s + 1] < trim[s])) report.supnorm_trim_decreasing = false;
    if (!(berr[s + 1] < berr[s])) report.beta_error_decreasing = false;
  }
  const auto slope = [&](const std::vector<double>& med) {
    if (S < 2) return 0.0;
    double xb = 0.0, yb = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      if (!(med[s] > 0.0)) return 0.0;
      xb += logn[s];
      yb += std::log(med[s]);
    }
    xb /= static_cast<double>(S);
    yb /= static_cast<double>(S);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      sxx += (logn[s] - xb) * (logn[s] - xb);
      sxy += (logn[s] - xb) * (std::log(med[s]) - yb);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
  };
  report.supnorm_trend_slope = slope(trim);
  report.beta_trend_slope = slope(berr);
}

} // namespace

StudyReport run_consistency_study(const StudyConfig& cfg) {
  check_common(cfg, 3);
  StudyReport report;
  report.kind = "consistency";

  const double tau = cfg.truth.tau();
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    run_size(cfg, s, report,
             [&](const Dataset& data, const FitConfig& fc, ReplicateRow& row) {
               const Estimate e = fit_stage1(data, cfg.truth.error, fc);
               row.beta = e.beta;
               row.supnorm_full = sup_norm_diff(e.hazard, cfg.truth.hazard0, 0.0, tau);
               row.supnorm_trim =
                   sup_norm_diff(e.hazard, cfg.truth.hazard0, 0.0, 0.95 * tau);
               row.objective = e.objective;
               row.stage = e.stage;
               row.stage1_min = e.hazard.min_value();
               row.final_min = row.stage1_min;
             });
  }
  fill_trends(report);
  return report;
}

StudyReport run_normality_study(const StudyConfig& cfg) {
  check_common(cfg, 1);
  StudyReport report;
  report.kind = "normality";

  // Population targets first: the scaled-parameter sandwich and one
  // integral-equation solve per weight function.  Their Monte Carlo
  // streams are disjoint from every replicate stream.
  const AsymptoticTables tables = compute_tables(cfg.truth, cfg.table_nodes);
  const Eigen::MatrixXd sigma =
      sigma_beta(cfg.truth, tables, cfg.variance_reps, substream_seed(cfg.seed, 0x5eed, 0));
  report.sandwich = sandwich_covariance(tables.M, sigma);
  std::vector<double> sigma_sq(cfg.weight_functions.size(), 0.0);
  for (std::size_t j = 0; j < cfg.weight_functions.size(); ++j) {
    std::vector<double> f(tables.grid.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = cfg.weight_functions[j](tables.grid[i]);
    const FredholmSolution sol =
        solve_fredholm(f, cfg.truth, tables, cfg.variance_reps,
                       substream_seed(cfg.seed, 0x5eed, 1 + static_cast<std::uint64_t>(j)));
    sigma_sq[j] = sol.sigma_sq;
  }

  const double tau = cfg.truth.tau();
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    run_size(cfg, s, report,
             [&](const Dataset& data, const FitConfig& fc, ReplicateRow& row) {
               const Estimate e1 = fit_stage1(data, cfg.truth.error, fc);
               const Estimate e2 = fit_stage2(data, cfg.truth.error, e1, fc);
               row.beta = e2.beta;
               row.supnorm_full = sup_norm_diff(e2.hazard, cfg.truth.hazard0, 0.0, tau);
               row.supnorm_trim =
                   sup_norm_diff(e2.hazard, cfg.truth.hazard0, 0.0, 0.95 * tau);
               row.objective = e2.objective;
               row.stage = e2.stage;
               row.stage1_min = e1.hazard.min_value();
               row.final_min = e2.hazard.min_value();
               for (const WeightFunction& f : cfg.weight_functions)
                 row.functional.push_back(
                     detail::functional_statistic(e2.hazard, cfg.truth, f, data.size()));
             });
    fill_normality_diagnostics(cfg, s, report);
    for (std::size_t j = 0; j < cfg.weight_functions.size(); ++j)
      report.sizes[s].functionals[j].sigma_sq = sigma_sq[j];
  }
  fill_trends(report);
  return report;
}

} // namespace coxmec
