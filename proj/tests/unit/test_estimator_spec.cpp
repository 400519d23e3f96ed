#include <gtest/gtest.h>

#include "qrv/error.hpp"
#include "qrv/estimator_spec.hpp"

using nlohmann::json;

namespace {

qrv::MonteCarloConfig quick() {
  qrv::MonteCarloConfig mc;
  mc.replications = 100000;
  return mc;
}

TEST(EstimatorSpec, ParsesAndRoundTrips) {
  const json j{{"type", "qrv"}, {"label", "x"}, {"lambdas", {0.8, 0.9}}, {"weights", {0.4, 0.6}},
               {"m", 10},       {"mode", "subsampled"}};
  const auto e = qrv::estimator_from_json(j);
  EXPECT_EQ(e.label, "x");
  EXPECT_EQ(qrv::type_name(e.spec), "qrv");
  const auto back = qrv::estimator_from_json(qrv::to_json(e));
  EXPECT_EQ(qrv::to_json(back).dump(), qrv::to_json(e).dump());
}

TEST(EstimatorSpec, RejectsUnknownTypeAndFields) {
  EXPECT_THROW(qrv::estimator_from_json(json{{"type", "garch"}}), qrv::ConfigError);
  EXPECT_THROW(qrv::estimator_from_json(json{{"type", "rv"}, {"lambda", 1}}), qrv::ConfigError);
  EXPECT_THROW(qrv::estimator_from_json(json{{"label", "no type"}}), qrv::ConfigError);
}

TEST(EstimatorSpec, AsymptoticWeightsResolved) {
  qrv::ScalingTable t;
  auto e = qrv::prepare(qrv::estimator_from_json(json{{"type", "qrv"}, {"lambdas", {0.8, 0.85, 0.9, 0.95}}}), t,
                        quick());
  const auto& q = std::get<qrv::QrvSpec>(e.spec);
  ASSERT_EQ(q.weights.size(), 4u);
  EXPECT_NEAR(q.weights[3], 0.46864, 5e-5);
}

TEST(EstimatorSpec, QrvStarNeedsExactlyOneWindowRule) {
  qrv::ScalingTable t;
  EXPECT_THROW(qrv::prepare(qrv::estimator_from_json(json{{"type", "qrv_star"}, {"lambdas", {0.9}}}), t, quick()),
               qrv::ConfigError);
  EXPECT_THROW(qrv::prepare(qrv::estimator_from_json(
                                json{{"type", "qrv_star"}, {"lambdas", {0.9}}, {"K", 10}, {"c", 0.5}}),
                            t, quick()),
               qrv::ConfigError);
  const auto s = qrv::estimator_from_json(json{{"type", "qrv_star"}, {"lambdas", {0.9}}, {"c", 0.5}});
  EXPECT_EQ(std::get<qrv::QrvStarSpec>(s.spec).window(10000), 50);
}

TEST(EstimatorSpec, EvaluatesEveryType) {
  qrv::ScalingTable t;
  std::vector<double> r(4000);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = ((i * 7919) % 13 - 6.0) * 1e-3;
  const qrv::ReturnSeries s(r);
  for (const auto& j : {json{{"type", "rv"}}, json{{"type", "bpv"}}, json{{"type", "trv"}}, json{{"type", "medrv"}},
                        json{{"type", "minrv"}}, json{{"type", "msrv"}}, json{{"type", "msrv"}, {"q", 4}},
                        json{{"type", "qrv"}, {"lambdas", {0.9}}, {"ci", true}},
                        json{{"type", "qrv_star"}, {"lambdas", {0.9}}, {"K", 8}, {"m", 20}}}) {
    const auto e = qrv::prepare(qrv::estimator_from_json(j), t, quick());
    const auto res = qrv::evaluate(e, s, t);
    EXPECT_TRUE(std::isfinite(res.value)) << j.dump();
  }
}

}  // namespace
