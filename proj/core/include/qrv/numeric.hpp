#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace qrv {

// Neumaier-compensated accumulator. Summation order is the caller's, so a
// fixed order gives bit-identical totals.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

// Standard normal helpers (thin wrappers over Boost.Math).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// Chi-square with one degree of freedom.
double chi2_1_pdf(double x);
double chi2_1_quantile(double p);

// Two-sided normal critical value for a confidence level in (0, 1).
double normal_critical_value(double level);

}  // namespace qrv
