#include <gtest/gtest.h>

#include <vector>

#include "qrv/numeric.hpp"
#include "qrv/parallel.hpp"

namespace {

TEST(CompensatedSum, RecoversCancellation) {
  const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(qrv::compensated_sum(xs), 2.0);
}

TEST(NormalHelpers, Quantiles) {
  EXPECT_NEAR(qrv::normal_quantile(0.90), 1.281552, 1e-6);
  EXPECT_NEAR(qrv::normal_quantile(0.95), 1.644854, 1e-6);
  EXPECT_NEAR(qrv::chi2_1_quantile(0.80), 1.64237, 1e-5);
  EXPECT_NEAR(qrv::normal_critical_value(0.95), 1.959964, 1e-6);
  EXPECT_NEAR(qrv::normal_cdf(qrv::normal_quantile(0.3)), 0.3, 1e-14);
}

TEST(MapChunks, IndependentOfWorkerCount) {
  auto f = [](std::size_t i) { return static_cast<double>(i * i) + 0.5; };
  const auto a = qrv::map_chunks<double>(100, 1, f);
  const auto b = qrv::map_chunks<double>(100, 3, f);
  EXPECT_EQ(a, b);
}

TEST(MapChunks, PropagatesExceptions) {
  auto f = [](std::size_t i) -> int {
    if (i == 17) throw std::runtime_error("boom");
    return 0;
  };
  EXPECT_THROW(qrv::map_chunks<int>(40, 2, f), std::runtime_error);
}

}  // namespace
