#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coxmec/asymptotics.hpp"
#include "coxmec/dataset.hpp"
#include "coxmec/estimator.hpp"
#include "coxmec/truth.hpp"

namespace coxmec {

struct WeightFunction;

namespace detail {

// sqrt(n) integral_0^tau (lambda_hat - lambda_0) f G_C du by exact
// per-panel Simpson over the merged breakpoints of both hazards and the
// censor law (exact through cubic panels, hence for constant and linear
// f).
double functional_statistic(const SplineHazard& fitted, const Truth& truth,
                            const WeightFunction& f, std::size_t n);

} // namespace detail

/*
 * Draws n records from the truth: X from its law, T by exact piecewise
 * inversion of the cumulative baseline hazard applied to E e^{-beta0'X}
 * with E standard exponential, C from the censor law, W = X + U.
 * Lifetimes beyond the reach of the cumulative hazard on [0, tau] are
 * censored at C.  Deterministic given the seed.  The truth is validated
 * first, so a hazard touching zero is rejected before the inverse is
 * attempted.
 */
Dataset sample_dataset(const Truth& truth, std::size_t n, std::uint64_t seed);

// Weight function for the hazard-functional CLT: a polynomial
// c0 + c1 u + c2 u^2 + ... on [0, tau] (every polynomial is Lipschitz
// there), carried with a label for reports.
struct WeightFunction {
  std::string name;
  std::vector<double> coefficients;

  double operator()(double u) const;

  static WeightFunction one();
  static WeightFunction identity();
};

struct StudyConfig {
  Truth truth = Truth::default_fixture();
  std::vector<std::size_t> sizes; // strictly increasing
  int replications = 100;         // per size
  FitConfig fit;
  std::vector<WeightFunction> weight_functions; // normality study only
  std::uint64_t seed = 1;
  int threads = 1;
  // Resolution knobs for the population quantities the normality study
  // compares against.
  std::size_t table_nodes = 2001;
  int variance_reps = 200000;
};

// One fitted replicate.  The consistency study reports the stage-1
// estimate, the normality study the stage-2 one; stage1_min and
// final_min carry the floor data either way.
struct ReplicateRow {
  std::size_t n = 0;
  int rep = 0;
  bool failed = false;
  std::string failure; // diagnostic message when failed
  Eigen::VectorXd beta;
  double supnorm_full = 0.0; // sup |lambda_hat - lambda_0| on [0, tau]
  double supnorm_trim = 0.0; // on [0, 0.95 tau]
  double objective = 0.0;
  int stage = 1;
  double stage1_min = 0.0; // min of the stage-1 hazard
  double final_min = 0.0;  // min of the reported hazard
  std::vector<double> functional; // sqrt(n) integral (lambda_hat - lambda_0) f G_C, per f
};

struct Quantiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

// Comparison of one functional-CLT statistic against its target.
struct FunctionalSummary {
  std::string name;
  double mean = 0.0;
  double empirical_variance = 0.0;
  double sigma_sq = 0.0; // from the integral equation
};

struct SizeSummary {
  std::size_t n = 0;
  int replications = 0;
  int failures = 0;
  Quantiles supnorm_full;
  Quantiles supnorm_trim;
  Quantiles beta_error; // ||beta_hat - beta0||

  // Normality diagnostics of sqrt(n)(beta_hat - beta0); filled by the
  // normality study, zero otherwise.
  Eigen::VectorXd scaled_mean;
  Eigen::MatrixXd scaled_covariance;
  Eigen::VectorXd skewness;        // componentwise, standardized sample
  Eigen::VectorXd excess_kurtosis; // componentwise, standardized sample
  // Anderson-Darling statistic of each standardized component with the
  // small-sample modification for estimated mean and variance; the 1%
  // critical value of that form is 1.035.
  Eigen::VectorXd anderson_darling;
  // Largest gap between empirical and normal quantiles of the
  // standardized first component over probability levels .05(.05).95.
  double qq_discrepancy = 0.0;

  std::vector<FunctionalSummary> functionals;
};

struct StudyReport {
  std::string kind; // "consistency" or "normality"
  std::vector<SizeSummary> sizes;
  std::vector<ReplicateRow> rows; // all replicates, ordered by (size, rep)

  // Trend of medians across sizes (consistency study): least-squares
  // slope of log(median) against log(n) and strict-decrease flags.
  bool supnorm_trim_decreasing = false;
  bool beta_error_decreasing = false;
  double supnorm_trend_slope = 0.0;
  double beta_trend_slope = 0.0;

  // Population targets (normality study).
  Eigen::MatrixXd sandwich;

  bool low_replication = false; // fewer than 2 successful replicates somewhere
};

/*
 * Stage-1 fits, cfg.replications replicates of each size in cfg.sizes
 * (at least 3 sizes, increasing).  Replicates run on cfg.threads
 * workers; replicate r of size index s draws its data from substream
 * (seed, s, 3r) and its fit multistarts from (seed, s, 3r+1), so
 * reports are identical for any thread count.  A replicate that throws
 * is recorded as failed and the study continues; more than 10% failures
 * at any size aborts with numeric_error.
 */
StudyReport run_consistency_study(const StudyConfig& cfg);

/*
 * Two-stage fits plus CLT diagnostics at each size: empirical covariance
 * of sqrt(n)(beta_hat^(2) - beta0) against the sandwich
 * M^{-1} Sigma_beta M^{-1}, and for each weight function f the empirical
 * variance of sqrt(n) integral (lambda_hat - lambda_0) f G_C du against
 * sigma_sq from the integral equation.  The functional statistic is
 * integrated exactly: the integrand is piecewise polynomial between the
 * merged breakpoints of lambda_hat, lambda_0, the censor law and f, and
 * each panel gets a Simpson rule that is exact through cubics.
 * Concurrency and failure policy as in run_consistency_study.
 */
StudyReport run_normality_study(const StudyConfig& cfg);

} // namespace coxmec
