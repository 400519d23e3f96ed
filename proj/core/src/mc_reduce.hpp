#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "qrv/numeric.hpp"

namespace qrv::detail {

// Per-chunk first and second moment accumulators for several quantities.
struct MomentSums {
  MomentSums() = default;
  explicit MomentSums(std::size_t n) : sum(n), sumsq(n) {}

  void add(std::size_t j, double x) {
    sum[j].add(x);
    sumsq[j].add(x * x);
  }

  std::vector<CompensatedSum> sum;
  std::vector<CompensatedSum> sumsq;
  std::uint64_t count = 0;
};

// Pooled mean and its standard error, reduced over chunks in index order.
inline std::pair<double, double> reduce_mean(const std::vector<MomentSums>& chunks, std::size_t j) {
  CompensatedSum s, ss;
  std::uint64_t n = 0;
  for (const auto& c : chunks) {
    s.add(c.sum[j].value());
    ss.add(c.sumsq[j].value());
    n += c.count;
  }
  const double dn = static_cast<double>(n);
  const double mean = s.value() / dn;
  const double var = n > 1 ? std::max(0.0, (ss.value() - dn * mean * mean) / (dn - 1.0)) : 0.0;
  return {mean, std::sqrt(var / dn)};
}

}  // namespace qrv::detail

#include <span>

#include "qrv/order_stats.hpp"

namespace qrv::detail {

// Raw per-chunk sums behind nu_moments: one slot per key, chunks in
// substream order. Keys must share m and variant and carry no lag.
std::vector<MomentSums> moment_chunks(std::span<const MomentKey> keys, const MonteCarloConfig& mc);

}  // namespace qrv::detail
