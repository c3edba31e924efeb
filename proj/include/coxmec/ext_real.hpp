#pragma once

#include <cmath>
#include <limits>

#include "coxmec/errors.hpp"

namespace coxmec {

/*
 * Extended real value: either finite or -infinity.
 *
 * The log-likelihood convention "delta * log lambda(Y) = -inf when
 * lambda(Y) = 0 and delta = 1" makes objective values live in
 * R u {-inf}.  Addition saturates: -inf absorbs any finite summand,
 * and -inf + -inf = -inf.  +inf and NaN are rejected at construction,
 * so IEEE double arithmetic on the payload realizes the saturating
 * semantics exactly.
 */
class ExtReal {
public:
  ExtReal() : v_(0.0) {}

  static ExtReal finite(double x) {
    if (std::isnan(x) || std::isinf(x))
      throw usage_error("ExtReal::finite requires a finite value");
    return ExtReal(x);
  }

  static ExtReal neg_inf() { return ExtReal(-std::numeric_limits<double>::infinity()); }

  bool is_finite() const { return std::isfinite(v_); }
  bool is_neg_inf() const { return std::isinf(v_) && v_ < 0; }

  // Raw payload; -inf when is_neg_inf().
  double value() const { return v_; }

  ExtReal& operator+=(const ExtReal& o) {
    v_ += o.v_;
    return *this;
  }
  friend ExtReal operator+(ExtReal a, const ExtReal& b) { return a += b; }

  // Scaling by a positive constant (used for sample means).
  ExtReal scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c))
      throw usage_error("ExtReal::scaled requires a positive finite factor");
    return ExtReal(v_ * c);
  }

  friend bool operator<(const ExtReal& a, const ExtReal& b) { return a.v_ < b.v_; }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return a.v_ > b.v_; }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return a.v_ >= b.v_; }
  friend bool operator==(const ExtReal& a, const ExtReal& b) { return a.v_ == b.v_; }

private:
  explicit ExtReal(double v) : v_(v) {}
  double v_;
};

} // namespace coxmec
