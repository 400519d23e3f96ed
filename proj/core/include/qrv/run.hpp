#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrv/bench.hpp"
#include "qrv/estimator_spec.hpp"
#include "qrv/io.hpp"

namespace qrv {

struct CsvInput {
  std::filesystem::path path;
  CsvOptions options;
};

struct SimulateInput {
  ModelSpec model;
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;  // falls back to RunConfig::seed
  int substeps = 10;
  Contamination contamination;
};

struct RunConfig {
  std::variant<CsvInput, SimulateInput> input;
  std::vector<Estimator> estimators;
  std::optional<std::filesystem::path> cache;
  std::uint64_t seed = 2010;
  MonteCarloConfig constants;
  // Periods per year for the annualized-volatility view; unset disables it.
  std::optional<double> annualization = 252.0;
  std::string format = "json";
};

RunConfig run_config_from_json(const nlohmann::json& j);
// Fully resolved: defaults filled in, so hashing it pins the run.
nlohmann::json to_json(const RunConfig& c);

// Hex SHA-256 of the compact dump of to_json(c).
std::string config_hash(const RunConfig& c);

struct EstimatorOutcome {
  Estimator estimator;
  std::optional<EstimateResult> result;
  std::optional<std::string> error;
};

struct Report {
  std::string config_hash;
  nlohmann::json config;
  std::uint64_t seed = 0;
  nlohmann::json source;
  std::size_t n_returns = 0;
  std::optional<double> annualization;
  std::vector<EstimatorOutcome> outcomes;
};

// Every estimator is validated and its constants resolved before any
// estimate is computed; a bad configuration throws ConfigError naming the
// estimator. Failures while estimating are recorded per estimator.
Report run(const RunConfig& config, ScalingTable& table);
Report run(const RunConfig& config);  // table from config.cache, or in memory
// Estimates on an already loaded series. `source` is copied into the report.
Report run_on_series(const RunConfig& config, const ReturnSeries& series, nlohmann::json source,
                     ScalingTable& table);

nlohmann::json to_json(const Report& r);
// estimator,type,value,stderr,ci_lower,ci_upper,ci_level,annualized_vol,diagnostics,error
void write_report_csv(std::ostream& os, const Report& r);

}  // namespace qrv
