#include <gtest/gtest.h>

#include <filesystem>
#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "qrv/error.hpp"
#include "qrv/scaling_table.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto p = fs::temp_directory_path() / ("qrv_test_" + name);
  fs::remove(p);
  return p;
}

qrv::MomentEstimate est(double v) {
  qrv::MomentEstimate e;
  e.value = v;
  e.std_error = 1e-4;
  e.replications = 100000;
  e.seed = 9;
  return e;
}

TEST(ScalingTable, PutFindGet) {
  qrv::ScalingTable t;
  const auto k = qrv::scaling_key(20, 0.9);
  EXPECT_FALSE(t.find(k));
  EXPECT_THROW((void)t.get(k), qrv::ConfigError);
  t.put(k, est(2.8));
  EXPECT_EQ(t.get(k).value, 2.8);
  EXPECT_EQ(t.size(), 1u);
}

TEST(ScalingTable, ClosedFormsBypassTheCache) {
  qrv::ScalingTable t;
  qrv::MonteCarloConfig mc;
  mc.replications = 10;
  const auto e = t.get_or_compute(qrv::scaling_key(2, 0.5, qrv::Variant::absolute), mc);
  EXPECT_EQ(e.method, qrv::Method::closed_form);
}

TEST(ScalingTable, FileRoundTripIsExact) {
  const auto path = temp_file("roundtrip.txt");
  const double v = 2.8037139123456789;
  {
    qrv::ScalingTable t(path);
    t.put(qrv::scaling_key(20, 0.9), est(v));
    qrv::ThetaMatrix th;
    th.kind = qrv::ThetaKind::blocked;
    th.m = 20;
    th.lambdas = {0.8, 0.9};
    th.values = Eigen::MatrixXd{{3.1, 0.2}, {0.2, 3.5}};
    th.std_error = Eigen::MatrixXd::Constant(2, 2, 0.01);
    t.put_theta(th);
  }
  qrv::ScalingTable back(path);
  EXPECT_EQ(back.get(qrv::scaling_key(20, 0.9)).value, v);
  const std::vector<double> lam{0.8, 0.9};
  const auto th = back.find_theta(qrv::ThetaKind::blocked, qrv::Variant::signed_symmetric, 20, lam);
  ASSERT_TRUE(th);
  EXPECT_EQ((*th).values(1, 1), 3.5);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, qrv::ScalingTable::kHeader);
}

TEST(ScalingTable, LaterRecordsWin) {
  const auto path = temp_file("override.txt");
  {
    qrv::ScalingTable t(path);
    t.put(qrv::scaling_key(10, 0.9), est(1.0));
    t.put(qrv::scaling_key(10, 0.9), est(2.0));
  }
  EXPECT_EQ(qrv::ScalingTable(path).get(qrv::scaling_key(10, 0.9)).value, 2.0);
}

TEST(ScalingTable, EnsureComputesMissingOnly) {
  qrv::ScalingTable t;
  t.put(qrv::scaling_key(10, 0.9), est(7.0));
  qrv::MonteCarloConfig mc;
  mc.replications = 100000;
  const std::vector<qrv::MomentKey> keys{qrv::scaling_key(10, 0.9), qrv::scaling_key(10, 0.8)};
  t.ensure(keys, mc);
  EXPECT_EQ(t.get(keys[0]).value, 7.0);
  const auto o = oracle::nu_mc(10, 0.8, 20000, 4);
  EXPECT_NEAR(t.get(keys[1]).value, o.mean, 5 * std::hypot(o.std_error, t.get(keys[1]).std_error));
}

TEST(ScalingTable, MalformedFileIsReported) {
  const auto path = temp_file("bad.txt");
  {
    std::ofstream os(path);
    os << qrv::ScalingTable::kHeader << "\nN signed scaling twenty\n";
  }
  EXPECT_ANY_THROW(qrv::ScalingTable{path});
}

}  // namespace
