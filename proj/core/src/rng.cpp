#include "qrv/rng.hpp"

namespace qrv {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

__extension__ typedef unsigned __int128 u128;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t r) noexcept {
  return splitmix64(base ^ splitmix64(r));
}

Philox::Philox(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept {
  const std::uint64_t k = splitmix64(seed);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  ctr_ = {0u, static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream),
          static_cast<std::uint32_t>(index >> 32)};
}

Philox::result_type Philox::operator()() noexcept {
  if (pos_ == 2) {
    const PhiloxCounter out = philox4x32_10(ctr_, key_);
    ++ctr_[0];
    buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    pos_ = 0;
  }
  return buf_[pos_++];
}

std::uint64_t Philox::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless rejection.
  u128 p = static_cast<u128>((*this)()) * n;
  auto lo = static_cast<std::uint64_t>(p);
  if (lo < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (lo < threshold) {
      p = static_cast<u128>((*this)()) * n;
      lo = static_cast<std::uint64_t>(p);
    }
  }
  return static_cast<std::uint64_t>(p >> 64);
}

}  // namespace qrv
