#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrv/estimators.hpp"
#include "qrv/preaveraging.hpp"
#include "qrv/scaling_table.hpp"

namespace qrv {

// given: explicit weights. asymptotic: optimal weights of the m -> infinity
// covariance. optimal: optimal weights of the finite-m covariance for the
// chosen mode (Monte Carlo, cached in the table).
enum class WeightRule { given, asymptotic, optimal };
std::string to_string(WeightRule r);

struct RvSpec {};
struct BpvSpec {};
struct TrvSpec {
  double omega_bar = 0.47;
  std::optional<double> c;  // default 6 sqrt(BPV)
};
struct MedRvSpec {};
struct MinRvSpec {};

struct QrvSpec {
  std::vector<double> lambdas;
  Variant variant = Variant::signed_symmetric;
  WeightRule rule = WeightRule::asymptotic;
  std::vector<double> weights;  // filled by prepare() unless given
  int m = 20;
  Mode mode = Mode::blocked;
  bool ci = false;
  double level = 0.95;
  std::optional<double> theta;  // alpha' Theta alpha, filled by prepare() when ci

  [[nodiscard]] QuantileConfig config() const;
};

struct QrvStarSpec {
  std::optional<int> K;        // fixed window, or
  std::optional<double> c;     // K = max(2, round(c sqrt(N)))
  WeightFunction h = WeightFunction::triangular();
  std::vector<double> lambdas;
  WeightRule rule = WeightRule::asymptotic;  // given or asymptotic
  std::vector<double> weights;
  int m = 40;
  NoiseMethod noise = NoiseMethod::autocovariance;
  bool ci = false;
  double level = 0.95;

  [[nodiscard]] int window(std::size_t n) const;
  [[nodiscard]] PreAvgConfig config(std::size_t n) const;
};

// q = nullopt picks msrv_optimal_q from pilot values: omega^2 by the
// autocovariance estimator, IV by RV - 2 N omega^2 (floored at RV / 100),
// IQ by IV^2.
struct MsrvSpec {
  std::optional<int> q;
};

using EstimatorSpec = std::variant<RvSpec, BpvSpec, TrvSpec, MedRvSpec, MinRvSpec, QrvSpec, QrvStarSpec, MsrvSpec>;

struct Estimator {
  std::string label;
  EstimatorSpec spec;
};

// "rv", "bpv", "trv", "medrv", "minrv", "qrv", "qrv_star", "msrv".
std::string type_name(const EstimatorSpec& spec);

Estimator estimator_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Estimator& e);

// Validates, resolves weight rules and CI constants, and computes missing
// scaling constants into the table.
Estimator prepare(Estimator e, ScalingTable& table, const MonteCarloConfig& mc);

// Requires a prepared estimator.
EstimateResult evaluate(const Estimator& e, const ReturnSeries& series, const ScalingTable& table);

}  // namespace qrv
