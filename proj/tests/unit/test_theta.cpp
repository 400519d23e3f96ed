#include <gtest/gtest.h>

#include <cmath>

#include "qrv/error.hpp"
#include "qrv/theta.hpp"

namespace {

const qrv::QuantileVector kFour({0.80, 0.85, 0.90, 0.95});

qrv::MonteCarloConfig mc(std::uint64_t reps) {
  qrv::MonteCarloConfig c;
  c.replications = reps;
  return c;
}

// Frozen values from an independent numpy evaluation of the closed form.
TEST(ThetaAsymptotic, Diagonal) {
  const auto t = qrv::theta_asymptotic(kFour);
  const double expected[] = {4.3229, 3.5961, 3.1630, 3.1273};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(t.values(i, i), expected[i], 5e-4);
  EXPECT_TRUE(t.values.isApprox(t.values.transpose()));
  EXPECT_EQ(t.std_error.norm(), 0.0);
}

TEST(ThetaAsymptotic, OptimalWeights) {
  const auto w = qrv::optimal_weights(qrv::theta_asymptotic(kFour).values);
  const double expected[] = {0.18916, 0.13293, 0.20927, 0.46864};
  double sum = 0;
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(w.weights[i], expected[i], 5e-5);
    sum += w.weights[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(w.theta, 2.4153, 5e-4);
  EXPECT_NEAR(qrv::achieved_theta(qrv::theta_asymptotic(kFour).values, w.weights), w.theta, 1e-10);
}

TEST(ThetaBlocked, SingleQuantile) {
  const auto t = qrv::theta_blocked(20, qrv::QuantileVector({0.90}), mc(200000));
  EXPECT_NEAR(t.values(0, 0), 3.110, std::max(0.03, 4 * t.std_error(0, 0)));
  EXPECT_GT(t.std_error(0, 0), 0.0);
}

TEST(ThetaBlocked, FourQuantilesWithAsymptoticWeights) {
  const auto t = qrv::theta_blocked(20, kFour, mc(200000));
  qrv::check_theta(t.values);
  const auto w = qrv::optimal_weights(qrv::theta_asymptotic(kFour).values);
  EXPECT_NEAR(qrv::achieved_theta(t.values, w.weights), 2.4097, 0.04);
}

TEST(ThetaSubsampled, SingleQuantile) {
  const auto t = qrv::theta_subsampled(20, qrv::QuantileVector({0.90}), mc(400000));
  EXPECT_NEAR(t.values(0, 0), 2.682, std::max(0.04, 4 * t.std_error(0, 0)));
}

TEST(ThetaBlocked, Deterministic) {
  const auto a = qrv::theta_blocked(10, qrv::QuantileVector({0.80, 0.90}), mc(100000));
  const auto b = qrv::theta_blocked(10, qrv::QuantileVector({0.80, 0.90}), mc(100000));
  EXPECT_EQ(a.values, b.values);
}

TEST(OptimalWeights, RejectsIllConditioned) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0 + 1e-15;
  EXPECT_THROW(qrv::optimal_weights(m), qrv::NumericalError);
}

TEST(CheckTheta, RejectsNonPsd) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(qrv::check_theta(m), qrv::NumericalError);
}

}  // namespace
