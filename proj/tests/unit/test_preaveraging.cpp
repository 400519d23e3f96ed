#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qrv/error.hpp"
#include "qrv/preaveraging.hpp"

namespace {

TEST(WeightFunction, TriangularConstants) {
  const auto h = qrv::WeightFunction::triangular();
  EXPECT_DOUBLE_EQ(h(0.25), 0.25);
  EXPECT_DOUBLE_EQ(h(0.75), 0.25);
  EXPECT_DOUBLE_EQ(h.derivative(0.2), 1.0);
  EXPECT_DOUBLE_EQ(h.derivative(0.7), -1.0);
  EXPECT_NEAR(h.psi1(), 1.0, 1e-14);
  EXPECT_NEAR(h.psi2(), 1.0 / 12.0, 1e-14);
  EXPECT_NEAR(h.w(1.0), 0.0, 1e-14);
  // int_0^{1/2} (1-u)... at u = 1/2: int_0^{1/2} y (1/2 - y) dy = 1/48
  EXPECT_NEAR(h.w(0.5), 1.0 / 48.0, 1e-14);
}

TEST(WeightFunction, TabulatedValidation) {
  EXPECT_THROW(qrv::WeightFunction::tabulated({0.0, 0.5, 1.0}, {0.0, 0.5, 0.1}), qrv::ConfigError);
  EXPECT_THROW(qrv::WeightFunction::tabulated({0.0, 0.6, 0.5, 1.0}, {0, 1, 1, 0}), qrv::ConfigError);
  EXPECT_THROW(qrv::WeightFunction::tabulated({0.0, 1.0}, {0.0, 0.0}), qrv::ConfigError);
  const auto t = qrv::WeightFunction::tabulated({0.0, 0.5, 1.0}, {0.0, 0.5, 0.0});
  EXPECT_NEAR(t.psi2(), 1.0 / 12.0, 1e-14);
}

TEST(PsiConstants, ConvergeToContinuous) {
  const auto h = qrv::WeightFunction::triangular();
  const auto p = qrv::psi_constants(200, h, 40000);
  EXPECT_NEAR(p.psi1_n, 1.0, 1e-3);
  EXPECT_NEAR(p.psi2_n, 1.0 / 12.0, 1e-4);
  EXPECT_DOUBLE_EQ(p.c_empirical, 1.0);
}

TEST(Preaveraging, MatchesOracle) {
  const auto r = oracle::normals(300, 1);
  const auto y = qrv::preaveraged_returns(qrv::ReturnSeries(r), 12, qrv::WeightFunction::triangular());
  const auto o = oracle::preaverage(r, 12);
  ASSERT_EQ(y.size(), o.size());
  ASSERT_EQ(y.size(), r.size() - 12 + 2);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], o[i], 1e-14);
  EXPECT_THROW(qrv::preaveraged_returns(qrv::ReturnSeries(r), 301, qrv::WeightFunction::triangular()),
               qrv::DataError);
}

TEST(Noise, EstimatorsRecoverVariance) {
  // Pure noise prices: returns are e_{i+1} - e_i.
  const auto e = oracle::normals(200001, 2, 0.001);
  std::vector<double> r(e.size() - 1);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = e[i + 1] - e[i];
  const qrv::ReturnSeries s(r);
  EXPECT_NEAR(qrv::noise_variance(s, qrv::NoiseMethod::autocovariance).omega2 / 1e-6, 1.0, 0.02);
  EXPECT_NEAR(qrv::noise_variance(s, qrv::NoiseMethod::half_rv).omega2 / 1e-6, 1.0, 0.02);
  EXPECT_EQ(qrv::parse_noise_method("half-rv"), qrv::NoiseMethod::half_rv);
}

TEST(Noise, NegativeAutocovarianceIsClamped) {
  std::vector<double> r(1000, 0.01);
  const auto n = qrv::noise_variance(qrv::ReturnSeries(r));
  EXPECT_EQ(n.omega2, 0.0);
  EXPECT_TRUE(n.clamped);
}

TEST(Msrv, WeightsAndOracle) {
  for (int q : {2, 5, 17}) {
    const auto a = qrv::msrv_weights(q);
    ASSERT_EQ(a.size(), static_cast<std::size_t>(q));
    double s = 0, s_over_j = 0;
    for (int j = 1; j <= q; ++j) {
      s += a[j - 1];
      s_over_j += a[j - 1] / j;
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << q;
    EXPECT_NEAR(s_over_j, 0.0, 1e-12) << q;
  }
  const auto r = oracle::normals(2000, 3, 0.01);
  EXPECT_NEAR(qrv::msrv(qrv::ReturnSeries(r), 9), oracle::msrv(r, 9), 1e-13);
}

TEST(Msrv, OptimalBandwidth) {
  EXPECT_EQ(qrv::msrv_optimal_q(1.0, 1.0, 0.0, 10000), 2);
  const int q_lo = qrv::msrv_optimal_q(1.0, 1.0, 1e-5, 10000);
  const int q_hi = qrv::msrv_optimal_q(1.0, 1.0, 1e-3, 10000);
  EXPECT_LT(q_lo, q_hi);
  EXPECT_GE(q_lo, 2);
}

qrv::PreAvgConfig star_config(int K, int m) {
  qrv::PreAvgConfig c;
  c.K = K;
  c.m = m;
  c.lambdas = qrv::QuantileVector({0.9});
  c.weights = {1.0};
  return c;
}

TEST(QrvStar, ConstantVolatilityNoNoiseIsUnbiased) {
  auto cfg = star_config(10, 20);
  qrv::ScalingTable t;
  qrv::MonteCarloConfig mc;
  mc.replications = 400000;
  t.ensure(qrv::required_keys(cfg.quantile_config()), mc);
  double mean = 0;
  const int reps = 40;
  for (int k = 0; k < reps; ++k) {
    const qrv::ReturnSeries s(oracle::normals(4000, 100 + k, 1.0 / std::sqrt(4000.0)));
    const auto r = qrv::qrv_star(s, cfg, t, qrv::NoiseEstimate{});
    mean += r.value / reps;
    EXPECT_GT(r.diagnostics.at("windows"), 0.0);
  }
  EXPECT_NEAR(mean, 1.0, 0.05);
}

TEST(QrvStar, RejectsShortSamples) {
  auto cfg = star_config(10, 20);
  qrv::ScalingTable t;
  t.put(qrv::scaling_key(20, 0.9), qrv::MomentEstimate{2.8, 0, qrv::Method::integration, 0, 0});
  EXPECT_THROW(qrv::qrv_star(qrv::ReturnSeries(oracle::normals(100, 1)), cfg, t, {}), qrv::DataError);
}

TEST(SigmaOracle, SymmetricAndPositive) {
  qrv::MonteCarloConfig mc;
  mc.replications = 100000;
  const std::vector<double> lam{0.6, 0.8}, nu{0.9, 2.0};
  const auto s = qrv::sigma_m_oracle(5, lam, nu, 1.0, 0.5, 1.0, qrv::WeightFunction::triangular(), mc);
  EXPECT_NEAR(s(0, 1), s(1, 0), 1e-14);
  EXPECT_GT(s(0, 0), 0.0);
  EXPECT_GT(s(1, 1), 0.0);
}

}  // namespace
