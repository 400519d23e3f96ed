#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrv/estimators.hpp"
#include "qrv/order_stats.hpp"
#include "qrv/scaling_table.hpp"

namespace qrv {

// Continuous piecewise-linear weight function on [0, 1] with h(0) = h(1) = 0.
class WeightFunction {
 public:
  // h(x) = min(x, 1 - x).
  static WeightFunction triangular();
  // Knots must start at 0, end at 1 and be strictly increasing; end values
  // must be zero and the function must not vanish identically.
  static WeightFunction tabulated(std::vector<double> knots, std::vector<double> values);

  [[nodiscard]] double operator()(double x) const;
  // Right derivative (the slope of the segment containing x).
  [[nodiscard]] double derivative(double x) const;

  [[nodiscard]] double psi1() const;  // integral of h'^2
  [[nodiscard]] double psi2() const;  // integral of h^2

  // w_h(u) = int_0^{1-u} h(y) h(y+u) dy and the same for h', both exact.
  [[nodiscard]] double w(double u) const;
  [[nodiscard]] double w_prime(double u) const;

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

 private:
  WeightFunction(std::vector<double> knots, std::vector<double> values, std::string name);

  std::vector<double> knots_;
  std::vector<double> values_;
  std::string name_;
};

struct PsiConstants {
  double psi1_n = 0.0;  // K sum_{j=1}^{K} (h(j/K) - h((j-1)/K))^2
  double psi2_n = 0.0;  // (1/K) sum_{j=1}^{K-1} h(j/K)^2
  double psi1 = 0.0;
  double psi2 = 0.0;
  double c_empirical = 0.0;  // K / sqrt(N)
};

PsiConstants psi_constants(int K, const WeightFunction& h, std::size_t n);

// Ybar_j = sum_{i=1}^{K-1} h(i/K) r_{j+i} for j = 0..N-K+1, with returns
// indexed from 1, so N - K + 2 values.
std::vector<double> preaveraged_returns(const ReturnSeries& series, int K, const WeightFunction& h);

enum class NoiseMethod { autocovariance, half_rv };
std::string to_string(NoiseMethod m);
NoiseMethod parse_noise_method(const std::string& s);

struct NoiseEstimate {
  double omega2 = 0.0;
  NoiseMethod method = NoiseMethod::autocovariance;
  bool clamped = false;
};

NoiseEstimate noise_variance(const ReturnSeries& series, NoiseMethod method = NoiseMethod::autocovariance);

struct PreAvgConfig {
  int K = 2;
  WeightFunction h = WeightFunction::triangular();
  QuantileVector lambdas;
  std::vector<double> weights;
  int m = 0;

  void validate() const;
  [[nodiscard]] QuantileConfig quantile_config() const;
};

// Bias-corrected pre-averaged QRV. Diagnostics carry c_empirical, windows,
// bias_correction, omega2 and noise_clamped. The correction can push the
// value below zero on short or very noisy samples; it is reported as is.
EstimateResult qrv_star(const ReturnSeries& series, const PreAvgConfig& config,
                        const ScalingTable& scaling, const NoiseEstimate& noise);

struct QrvStarAvar {
  Eigen::MatrixXd values;  // estimate of (2 / (c psi2^2)) Sigma_m
  std::size_t terms = 0;
  int floored_diagonals = 0;
};

// Data-based estimate of the asymptotic covariance of the QRV* components.
// The outer index runs over i = M-1 .. N-2M with M = m(K-1), so that
// q*_{i+M} stays inside the sample, and the sum is normalised by its
// actual term count.
QrvStarAvar qrv_star_avar(const ReturnSeries& series, const PreAvgConfig& config,
                          const ScalingTable& scaling);

// Attaches stderr sqrt(alpha' V alpha / sqrt(N)) and a normal interval.
EstimateResult qrv_star_ci(EstimateResult est, const QrvStarAvar& avar,
                           std::span<const double> weights, std::size_t n, double level);

struct FCovariance {
  double value = 0.0;
  double std_error = 0.0;
  double noise_variance_term = 0.0;    // psi1 omega^2 / c
  double noise_covariance_term = 0.0;  // w_{h'}(u) omega^2 / c
};

struct FCovarianceParams {
  int m = 0;
  int l = 1;
  double x = 1.0;  // local volatility sigma
  double u = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double omega2 = 0.0;
  double c = 1.0;
  WeightFunction h = WeightFunction::triangular();
};

// Monte Carlo covariance of the symmetric squared quantiles of two jointly
// normal m-vectors S and T: independent components, common variance
// c psi2 x^2 + psi1 omega^2 / c, and cross covariances only between S_{b+l-1}
// and T_b (lag u) and S_{b+l} and T_b (lag 1-u). Throws NumericalError when
// that joint covariance is not PSD.
FCovariance f_covariance_oracle(const FCovarianceParams& p, const MonteCarloConfig& mc);

// (2 / (c psi2^2)) Sigma_m under constant volatility x, with the u-integral
// by 7-point Gauss-Legendre on [0, 1/2] and [1/2, 1]. nu holds
// nu_1(m, lambda_s). Uses the exact psi constants of h.
Eigen::MatrixXd sigma_m_oracle(int m, std::span<const double> lambdas, std::span<const double> nu,
                               double x, double omega2, double c, const WeightFunction& h,
                               const MonteCarloConfig& mc);

// Multi-scale RV with q scales and the cubic-kernel weights a_j.
double msrv(const ReturnSeries& series, int q);
std::vector<double> msrv_weights(int q);

// Integer q >= 2 near c* sqrt(N), where c* minimises the asymptotic MSRV
// variance 2(52/35) c IQ + (48/5) omega^2 (IV + omega^2/2) / c + 48 omega^4 / c^3.
int msrv_optimal_q(double iv_guess, double iq_guess, double omega2, std::size_t n);

}  // namespace qrv
