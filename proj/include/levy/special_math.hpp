#pragma once

#include <cmath>

namespace levy {

/// Natural log of Γ(x) for x > 0 (Lanczos, g = 671/128). Relative error below 1e-14
/// away from the zeros at x = 1 and x = 2, absolute error below 1e-15 near them.
double log_gamma(double x);

/// sin(πx), returning an exact zero when x is an integer to within a few ulps.
double sin_pi(double x);

/// Sign and log-magnitude of 1/Γ(z) for any real z. Poles of Γ give sign 0.
struct SignedLog {
  int sign = 0;
  double log_abs = -INFINITY;

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};
SignedLog log_reciprocal_gamma(double z);

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace levy
