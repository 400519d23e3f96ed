#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrv/order_stats.hpp"

namespace qrv {

enum class ThetaKind { blocked, subsampled, asymptotic };

std::string to_string(ThetaKind k);
ThetaKind parse_theta_kind(const std::string& s);

// Asymptotic covariance constants of the per-quantile estimators, in units
// of IQ / N. The diagonal entry for one quantile is the efficiency constant.
struct ThetaMatrix {
  Eigen::MatrixXd values;
  Eigen::MatrixXd std_error;  // zero for closed forms
  ThetaKind kind = ThetaKind::asymptotic;
  std::optional<int> m;
  Variant variant = Variant::signed_symmetric;
  std::vector<double> lambdas;
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;
};

// Blocked constants m (nu_ij - nu_i nu_j) / (nu_i nu_j) from one joint Monte
// Carlo pass over i.i.d. blocks. Standard errors come from the spread of
// per-substream estimates.
ThetaMatrix theta_blocked(int m, const QuantileVector& lambdas, const MonteCarloConfig& mc);

// Subsampled constants: the long-run covariance of overlapping window
// quantiles, sum over |d| < m of cov(q_i(0), q_j(d)), over nu_i nu_j.
// Each substream is one long i.i.d. sequence scanned by a sliding sorted
// window; mc.replications counts windows.
ThetaMatrix theta_subsampled(int m, const QuantileVector& lambdas, const MonteCarloConfig& mc);

// m -> infinity closed form, shared by blocked and subsampled estimators.
ThetaMatrix theta_asymptotic(const QuantileVector& lambdas);

struct OptimalWeights {
  std::vector<double> weights;
  double theta = 0.0;  // 1 / (iota' Theta^{-1} iota)
  double condition_number = 0.0;
  bool has_negative = false;
};

// alpha* = Theta^{-1} iota / (iota' Theta^{-1} iota). Throws NumericalError
// when the condition number exceeds max_condition. Negative weights are
// returned unchanged and reported through qrv::warn.
OptimalWeights optimal_weights(const Eigen::MatrixXd& theta, double max_condition = 1e12);

// alpha' Theta alpha.
double achieved_theta(const Eigen::MatrixXd& theta, std::span<const double> weights);

// Throws NumericalError unless symmetric within 1e-12 and PSD within 1e-9.
void check_theta(const Eigen::MatrixXd& theta);

}  // namespace qrv
