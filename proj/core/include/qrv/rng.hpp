#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace qrv {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent streams carved out of one seed. Each enumerator occupies its
// own counter word, so toggling contamination never shifts the base path.
enum class Stream : std::uint32_t {
  path = 1,
  jumps = 2,
  outlier = 3,
  noise = 4,
  constants = 5,
  bench = 6,
  oracle = 7,
};

// Seed of replication r within an experiment: splitmix64(base ^ splitmix64(r)).
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t r) noexcept;

// UniformRandomBitGenerator over a single (seed, stream, index) substream.
// Counter layout: {block, lo32(index), stream, hi32(index)}; key is
// splitmix64(seed) split into two words. One block yields two 64-bit outputs.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  PhiloxKey key_{};
  PhiloxCounter ctr_{};
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

// Standard normal draws from a Philox substream (Boost ziggurat).
class NormalSource {
 public:
  NormalSource(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept
      : eng_(seed, stream, index) {}

  double operator()() { return dist_(eng_); }
  void fill(std::span<double> out) {
    for (double& x : out) x = dist_(eng_);
  }
  Philox& engine() noexcept { return eng_; }

 private:
  Philox eng_;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace qrv
