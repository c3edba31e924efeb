#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace coxmec {

/*
 * Right-censored sample with surrogate covariates.
 *
 * Row i holds (y_i, delta_i, w_i): the follow-up time y_i = min(T_i, C_i)
 * in [0, tau], the event indicator delta_i, and the error-contaminated
 * covariate w_i = x_i + u_i in R^m.
 */
struct Dataset {
  std::vector<double> y;
  std::vector<int> delta;
  Eigen::MatrixXd w; // n x m

  std::size_t size() const { return y.size(); }
  Eigen::Index covariate_dim() const { return w.cols(); }

  // Validates row shapes, y >= 0 finite, delta in {0,1}; if tau >= 0 is
  // given also y <= tau.  Throws data_error with the offending row.
  void validate(double tau = -1.0) const;
};

// CSV with header "y,delta,w1,...,wm".  Rejects malformed rows (wrong
// field count, non-numeric entries, NaN, negative y, delta not in {0,1})
// with the 1-based data row number in the message.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& d, const std::string& path);

} // namespace coxmec
