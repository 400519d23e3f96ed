#include "qrv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "sorted_window.hpp"

namespace qrv {

ReturnSeries::ReturnSeries(std::vector<double> r, double span_) : returns(std::move(r)), span(span_) {
  if (returns.empty()) throw DataError("return series must not be empty");
  if (!(span > 0.0) || !std::isfinite(span)) throw ConfigError("series span must be positive");
  for (std::size_t i = 0; i < returns.size(); ++i)
    if (!std::isfinite(returns[i]))
      throw DataError("return " + std::to_string(i) + " is not finite");
}

ReturnSeries log_returns(std::span<const double> prices, double span) {
  if (prices.size() < 2) throw DataError("need at least two prices to form a return");
  std::vector<double> r(prices.size() - 1);
  for (std::size_t i = 0; i < prices.size(); ++i)
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
      throw DataError("price " + std::to_string(i) + " is not a positive finite number");
  for (std::size_t i = 0; i + 1 < prices.size(); ++i) r[i] = std::log(prices[i + 1]) - std::log(prices[i]);
  return ReturnSeries(std::move(r), span);
}

std::string to_string(Mode m) { return m == Mode::blocked ? "blocked" : "subsampled"; }

Mode parse_mode(const std::string& s) {
  if (s == "blocked") return Mode::blocked;
  if (s == "subsampled") return Mode::subsampled;
  throw ConfigError("unknown mode '" + s + "'");
}

void QuantileConfig::validate() const {
  if (lambdas.size() == 0) throw ConfigError("quantile config needs at least one quantile");
  if (weights.size() != lambdas.size())
    throw ConfigError("weight count " + std::to_string(weights.size()) + " does not match quantile count " +
                      std::to_string(lambdas.size()));
  const double total = compensated_sum(weights);
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("quantile weights must sum to 1 within 1e-12");
  for (double l : lambdas.values()) quantile_rank(m, l, lambdas.variant());
  if (lambdas.variant() == Variant::signed_symmetric) {
    const int top = quantile_rank(m, lambdas.max(), Variant::signed_symmetric);
    if (m - top < 1)
      throw ConfigError("signed quantiles must discard at least one return per tail: (1 - max lambda) m >= 1");
  }
}

namespace {

struct Ranks {
  int lo;
  int hi;
};

std::vector<Ranks> ranks_of(const QuantileConfig& c) {
  std::vector<Ranks> out;
  for (double l : c.lambdas.values()) {
    const int hi = quantile_rank(c.m, l, c.variant());
    out.push_back({c.variant() == Variant::signed_symmetric ? c.m - hi + 1 : hi, hi});
  }
  return out;
}

template <class Get>
double block_stat(const Ranks& r, bool absolute, int power, Get&& at) {
  const double hi = at(r.hi);
  const double hi2 = hi * hi;
  if (absolute) return power == 1 ? hi2 : hi2 * hi2;
  const double lo = at(r.lo);
  const double lo2 = lo * lo;
  return power == 1 ? lo2 + hi2 : lo2 * lo2 + hi2 * hi2;
}

struct RawSums {
  std::vector<double> sums;
  std::size_t count = 0;
  std::size_t n_used = 0;
  std::size_t dropped = 0;
};

// power 1: squared quantiles, power 2: fourth powers.
RawSums block_sums(std::span<const double> x, const QuantileConfig& c, int power) {
  const auto ranks = ranks_of(c);
  const bool absolute = c.variant() == Variant::absolute;
  const auto m = static_cast<std::size_t>(c.m);
  std::vector<CompensatedSum> acc(ranks.size());
  RawSums out;
  if (c.mode == Mode::blocked) {
    const std::size_t blocks = x.size() / m;
    if (blocks == 0) throw DataError("series shorter than one block: N=" + std::to_string(x.size()) +
                                     " < m=" + std::to_string(m));
    std::vector<double> b(m);
    for (std::size_t i = 0; i < blocks; ++i) {
      std::copy_n(x.begin() + i * m, m, b.begin());
      if (absolute)
        for (double& v : b) v = std::abs(v);
      std::sort(b.begin(), b.end());
      for (std::size_t j = 0; j < ranks.size(); ++j)
        acc[j].add(block_stat(ranks[j], absolute, power, [&](int k) { return b[k - 1]; }));
    }
    out.count = blocks;
    out.n_used = blocks * m;
    out.dropped = x.size() - out.n_used;
  } else {
    // Signed: windows 1..N-m+1. Absolute: windows 1..N-m.
    if (x.size() < m + (absolute ? 1 : 0))
      throw DataError("series too short for subsampled windows of length m=" + std::to_string(m));
    const std::size_t windows = absolute ? x.size() - m : x.size() - m + 1;
    std::vector<double> ax(x.begin(), x.end());
    if (absolute)
      for (double& v : ax) v = std::abs(v);
    detail::SortedWindow w(std::span<const double>(ax).first(m));
    for (std::size_t i = 0; i < windows; ++i) {
      if (i > 0) w.slide(ax[i - 1], ax[i + m - 1]);
      for (std::size_t j = 0; j < ranks.size(); ++j)
        acc[j].add(block_stat(ranks[j], absolute, power, [&](int k) { return w.at(k); }));
    }
    out.count = windows;
    out.n_used = x.size();
  }
  for (const auto& a : acc) out.sums.push_back(a.value());
  return out;
}

}  // namespace

double symmetric_squared_quantile(std::span<const double> block, int m, double lambda) {
  if (block.size() != static_cast<std::size_t>(m))
    throw std::logic_error("block length does not match m");
  const int hi = quantile_rank(m, lambda, Variant::signed_symmetric);
  std::vector<double> b(block.begin(), block.end());
  std::sort(b.begin(), b.end());
  const double x = b[hi - 1];
  const double y = b[m - hi];
  return x * x + y * y;
}

std::vector<MomentKey> required_keys(const QuantileConfig& config) {
  std::vector<MomentKey> keys;
  for (double l : config.lambdas.values()) keys.push_back(scaling_key(config.m, l, config.variant()));
  return keys;
}

std::vector<MomentKey> required_quarticity_keys(const QuantileConfig& config) {
  std::vector<MomentKey> keys;
  for (double l : config.lambdas.values()) keys.push_back(quarticity_key(config.m, l, config.variant()));
  return keys;
}

namespace {

std::vector<double> components(const ReturnSeries& series, const QuantileConfig& config,
                               const ScalingTable& scaling, RawSums& raw) {
  config.validate();
  const auto keys = required_keys(config);
  std::vector<double> nu;
  for (const auto& k : keys) nu.push_back(scaling.get(k).value);
  raw = block_sums(series.view(), config, 1);
  std::vector<double> out(keys.size());
  for (std::size_t j = 0; j < keys.size(); ++j) {
    if (config.mode == Mode::blocked)
      out[j] = config.m * raw.sums[j] / nu[j];
    else
      out[j] = static_cast<double>(raw.n_used) * raw.sums[j] / (nu[j] * static_cast<double>(raw.count));
  }
  return out;
}

}  // namespace

std::vector<double> qrv_components(const ReturnSeries& series, const QuantileConfig& config,
                                   const ScalingTable& scaling) {
  RawSums raw;
  return components(series, config, scaling, raw);
}

EstimateResult qrv(const ReturnSeries& series, const QuantileConfig& config,
                   const ScalingTable& scaling) {
  RawSums raw;
  const auto comp = components(series, config, scaling, raw);
  CompensatedSum total;
  for (std::size_t j = 0; j < comp.size(); ++j) total.add(config.weights[j] * comp[j]);
  EstimateResult r;
  r.value = total.value();
  r.diagnostics[config.mode == Mode::blocked ? "blocks" : "windows"] = static_cast<double>(raw.count);
  r.diagnostics["n_used"] = static_cast<double>(raw.n_used);
  r.diagnostics["dropped_returns"] = static_cast<double>(raw.dropped);
  return r;
}

EstimateResult qrq(const ReturnSeries& series, const QuantileConfig& config,
                   const ScalingTable& scaling) {
  config.validate();
  if (config.mode != Mode::blocked) throw ConfigError("quarticity estimator is defined for blocked mode only");
  const auto keys = required_quarticity_keys(config);
  const auto raw = block_sums(series.view(), config, 2);
  const double n_used = static_cast<double>(raw.n_used);
  CompensatedSum total;
  for (std::size_t j = 0; j < keys.size(); ++j)
    total.add(config.weights[j] * config.m * n_used * raw.sums[j] / scaling.get(keys[j]).value);
  EstimateResult r;
  r.value = total.value();
  r.diagnostics["blocks"] = static_cast<double>(raw.count);
  r.diagnostics["n_used"] = n_used;
  r.diagnostics["dropped_returns"] = static_cast<double>(raw.dropped);
  return r;
}

EstimateResult feasible_ci(EstimateResult iv, const EstimateResult& iq, double theta, std::size_t n,
                           double level) {
  if (!(theta >= 0.0)) throw ConfigError("efficiency constant theta must be nonnegative");
  if (n == 0) throw ConfigError("sample size must be positive");
  if (!(iq.value >= 0.0)) throw ConfigError("quarticity estimate must be nonnegative");
  const double z = normal_critical_value(level);
  const double var = theta * iq.value / static_cast<double>(n);
  const double se = std::sqrt(var);
  iv.asymptotic_variance = var;
  iv.std_error = se;
  iv.ci = ConfidenceInterval{iv.value - z * se, iv.value + z * se, level};
  iv.diagnostics["theta"] = theta;
  return iv;
}

double rv(const ReturnSeries& series) {
  CompensatedSum s;
  for (double x : series.returns) s.add(x * x);
  return s.value();
}

double bpv(const ReturnSeries& series) {
  const auto& x = series.returns;
  if (x.size() < 2) throw DataError("bipower variation needs N >= 2");
  CompensatedSum s;
  for (std::size_t i = 1; i < x.size(); ++i) s.add(std::abs(x[i]) * std::abs(x[i - 1]));
  return 0.5 * std::numbers::pi * s.value();
}

TrvResult trv(const ReturnSeries& series, double omega_bar, std::optional<double> c) {
  if (!(omega_bar > 0.0 && omega_bar < 0.5)) throw ConfigError("TRV exponent must lie in (0, 1/2)");
  if (c && !(*c > 0.0)) throw ConfigError("TRV constant c must be positive");
  const double cc = c ? *c : 6.0 * std::sqrt(bpv(series));
  TrvResult out;
  out.threshold = cc * std::pow(static_cast<double>(series.size()), -omega_bar);
  CompensatedSum s;
  for (double x : series.returns) {
    if (std::abs(x) < out.threshold)
      s.add(x * x);
    else
      ++out.truncated;
  }
  out.value = s.value();
  return out;
}

double medrv(const ReturnSeries& series) {
  const auto& x = series.returns;
  const std::size_t n = x.size();
  if (n < 3) throw DataError("MedRV needs N >= 3");
  CompensatedSum s;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = std::abs(x[i - 1]), b = std::abs(x[i]), c = std::abs(x[i + 1]);
    const double med = std::max(std::min(a, b), std::min(std::max(a, b), c));
    s.add(med * med);
  }
  const double nn = static_cast<double>(n);
  return std::numbers::pi / (6.0 - 4.0 * std::sqrt(3.0) + std::numbers::pi) * (nn / (nn - 2.0)) * s.value();
}

double minrv(const ReturnSeries& series) {
  const auto& x = series.returns;
  const std::size_t n = x.size();
  if (n < 2) throw DataError("MinRV needs N >= 2");
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = std::min(std::abs(x[i]), std::abs(x[i + 1]));
    s.add(v * v);
  }
  const double nn = static_cast<double>(n);
  return std::numbers::pi / (std::numbers::pi - 2.0) * (nn / (nn - 1.0)) * s.value();
}

}  // namespace qrv
