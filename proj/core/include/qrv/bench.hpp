#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrv/estimator_spec.hpp"
#include "qrv/simulate.hpp"
#include "qrv/theta.hpp"

namespace qrv {

struct JumpSpec {
  std::size_t count = 1;
  double variation = 0.25;  // sum of squared jumps as a fraction of IV
};

// Applied in the fixed order jumps, outlier, noise; each draws from its own
// substream of the replication seed.
struct Contamination {
  std::optional<JumpSpec> jumps;
  std::optional<double> outlier;  // v_O
  std::optional<double> noise_gamma2;
};

struct ExperimentConfig {
  ModelSpec model;
  Contamination contamination;
  std::size_t n = 1000;
  std::size_t replications = 10'000;
  std::vector<Estimator> estimators;
  std::uint64_t base_seed = 2010;
  int substeps = 10;
  unsigned workers = 1;
  MonteCarloConfig constants;  // budget for missing scaling constants

  void validate() const;
};

MonteCarloConfig mc_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MonteCarloConfig& mc);

ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelSpec& m);
Contamination contamination_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Contamination& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

// Path of replication r: simulate with replication_seed(base_seed, r), then
// contaminate.
PathResult replication_path(const ExperimentConfig& config, std::size_t r);

struct BenchRow {
  std::string label;
  std::size_t count = 0;     // successful replications
  std::size_t failures = 0;  // replications where the estimator threw
  double bias = 0.0;         // mean of estimate / IV
  double bias_se = 0.0;
  double efficiency = 0.0;   // variance of sqrt(N)(estimate - IV) / sqrt(IQ)
  double efficiency_se = 0.0;
  double mse = 0.0;          // mean of (estimate - IV)^2
  double mse_se = 0.0;
  std::optional<double> coverage;  // share of intervals containing IV
  std::optional<double> coverage_se;
  std::optional<std::string> first_error;
};

struct BenchTable {
  ExperimentConfig config;
  std::vector<BenchRow> rows;
  double mean_iv = 0.0;
};

// Estimators are prepared against `table` first (computing any missing
// constants); replications then run in fixed-size chunks so the output does
// not depend on the worker count.
BenchTable bias_efficiency_experiment(const ExperimentConfig& config, ScalingTable& table);

// Runs the experiment with every interval estimator forced to `level`.
// Estimators without a feasible interval are rejected.
BenchTable coverage_experiment(ExperimentConfig config, double level, ScalingTable& table);

struct EfficiencyCell {
  ThetaKind kind = ThetaKind::blocked;
  std::optional<int> m;
  std::vector<double> lambdas;
  std::string weighting;  // "single", "optimal" or "asymptotic"
  std::vector<double> weights;
  double theta = 0.0;
  double std_error = 0.0;
};

// One cell per (kind, m, quantile set): single quantiles report the diagonal,
// sets report both finite-m optimal and asymptotic-weight efficiencies.
// Asymptotic cells (kind asymptotic, no m) come from the closed form.
std::vector<EfficiencyCell> efficiency_table(const std::vector<int>& ms,
                                             const std::vector<std::vector<double>>& quantile_sets,
                                             const std::vector<ThetaKind>& kinds, ScalingTable& table,
                                             const MonteCarloConfig& mc);

struct MsePoint {
  int K = 0;
  bool feasible = true;
  double mse = 0.0;
  double log_mse = 0.0;
  double bias = 0.0;  // mean of estimate / IV
  std::size_t failures = 0;
};

struct MseCurve {
  std::vector<MsePoint> points;
  double msrv_mse = 0.0;
  double msrv_log_mse = 0.0;
  std::optional<int> argmin_K;
  std::vector<std::string> skipped;  // reasons for infeasible K
};

// QRV* (from `star`, K overridden per point) and MSRV with the bandwidth
// chosen from the true IV, IQ and noise variance, on shared paths.
MseCurve mse_curve_K(const ExperimentConfig& config, const QrvStarSpec& star, const std::vector<int>& K_values,
                     ScalingTable& table);

void write_csv(std::ostream& os, const BenchTable& t);
nlohmann::json to_json(const BenchTable& t);
void write_csv(std::ostream& os, const std::vector<EfficiencyCell>& cells);
nlohmann::json to_json(const std::vector<EfficiencyCell>& cells);
// K,log_mse,mse,bias,feasible; a last row "msrv" carries the reference.
void write_csv(std::ostream& os, const MseCurve& c);
nlohmann::json to_json(const MseCurve& c);

}  // namespace qrv
