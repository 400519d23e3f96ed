#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrv/order_stats.hpp"
#include "qrv/scaling_table.hpp"

namespace qrv {

// Equidistant log-returns over a window of length `span` (default 1).
struct ReturnSeries {
  std::vector<double> returns;
  double span = 1.0;

  ReturnSeries() = default;
  explicit ReturnSeries(std::vector<double> r, double span_ = 1.0);

  [[nodiscard]] std::size_t size() const noexcept { return returns.size(); }
  [[nodiscard]] std::span<const double> view() const noexcept { return returns; }
};

// returns[i] = ln(p[i+1]) - ln(p[i]). Throws DataError on a nonpositive
// price or fewer than two prices.
ReturnSeries log_returns(std::span<const double> prices, double span = 1.0);

enum class Mode { blocked, subsampled };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct QuantileConfig {
  QuantileVector lambdas;
  std::vector<double> weights;
  int m = 0;
  Mode mode = Mode::blocked;

  [[nodiscard]] Variant variant() const noexcept { return lambdas.variant(); }
  // Weights sum to 1 within 1e-12, every lambda*m is an integer, and the
  // signed variant discards at least one return per tail: (1 - max) m >= 1.
  void validate() const;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
};

struct EstimateResult {
  double value = 0.0;
  std::optional<double> asymptotic_variance;  // variance of the estimate itself
  std::optional<double> std_error;
  std::optional<ConfidenceInterval> ci;
  std::map<std::string, double> diagnostics;
};

// x_(lambda m)^2 + x_(m - lambda m + 1)^2 of one block.
double symmetric_squared_quantile(std::span<const double> block, int m, double lambda);

// Scaling constants qrv needs from the table.
std::vector<MomentKey> required_keys(const QuantileConfig& config);
// Constants qrq needs.
std::vector<MomentKey> required_quarticity_keys(const QuantileConfig& config);

EstimateResult qrv(const ReturnSeries& series, const QuantileConfig& config,
                   const ScalingTable& scaling);

// Per-quantile QRV values, before weighting.
std::vector<double> qrv_components(const ReturnSeries& series, const QuantileConfig& config,
                                   const ScalingTable& scaling);

// Quarticity from fourth powers of block quantiles (blocked mode only).
EstimateResult qrq(const ReturnSeries& series, const QuantileConfig& config,
                   const ScalingTable& scaling);

// Attaches stderr sqrt(theta * iq / N) and a symmetric normal interval.
EstimateResult feasible_ci(EstimateResult iv, const EstimateResult& iq, double theta,
                           std::size_t n, double level);

double rv(const ReturnSeries& series);
double bpv(const ReturnSeries& series);

struct TrvResult {
  double value = 0.0;
  std::size_t truncated = 0;
  double threshold = 0.0;
};
// Default c is 6 sqrt(BPV).
TrvResult trv(const ReturnSeries& series, double omega_bar = 0.47, std::optional<double> c = {});

double medrv(const ReturnSeries& series);
double minrv(const ReturnSeries& series);

}  // namespace qrv
