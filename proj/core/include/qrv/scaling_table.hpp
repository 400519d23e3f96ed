#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "qrv/order_stats.hpp"
#include "qrv/theta.hpp"

namespace qrv {

// Cache of order-statistic constants with an optional append-only backing
// file. Line format (fields separated by single spaces, numbers as %.17g):
//
//   # qrv-constants v1
//   N <variant> <kind> <m> <lambda> <lambda2|-> <r> <lag|-> <value> <stderr> <method> <reps> <seed>
//   T <kind> <variant> <m|-> <k> <lambda_1..k> <reps> <seed> <values row-major> <stderrs row-major>
//
// Later records override earlier ones. One writer, many readers.
class ScalingTable {
 public:
  static constexpr const char* kHeader = "# qrv-constants v1";

  ScalingTable();
  // Loads the file if it exists; new entries are appended to it.
  explicit ScalingTable(std::filesystem::path cache_file);
  ScalingTable(ScalingTable&&) noexcept;
  ScalingTable& operator=(ScalingTable&&) noexcept;
  ~ScalingTable();

  [[nodiscard]] std::optional<MomentEstimate> find(const MomentKey& key) const;
  // Throws ConfigError naming the key when absent.
  [[nodiscard]] MomentEstimate get(const MomentKey& key) const;
  void put(const MomentKey& key, const MomentEstimate& est);

  // Closed forms are always preferred; otherwise cached or freshly computed.
  MomentEstimate get_or_compute(const MomentKey& key, const Precision& precision);
  // Computes every missing key, one joint pass per (m, variant).
  void ensure(std::span<const MomentKey> keys, const MonteCarloConfig& mc);

  [[nodiscard]] std::optional<ThetaMatrix> find_theta(ThetaKind kind, Variant variant,
                                                      std::optional<int> m,
                                                      std::span<const double> lambdas) const;
  void put_theta(const ThetaMatrix& theta);

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] const std::optional<std::filesystem::path>& cache_file() const noexcept {
    return file_;
  }

  static std::string format_record(const MomentKey& key, const MomentEstimate& est);
  static std::string format_theta_record(const ThetaMatrix& theta);

 private:
  struct ThetaId {
    ThetaKind kind;
    Variant variant;
    int m;
    std::vector<long> ranks;  // lambda scaled by 1e9, rounded
    auto operator<=>(const ThetaId&) const = default;
  };
  static ThetaId theta_id(ThetaKind kind, Variant variant, std::optional<int> m,
                          std::span<const double> lambdas);

  void load();
  void append_line(const std::string& line);

  std::optional<std::filesystem::path> file_;
  std::map<MomentKey, MomentEstimate> entries_;
  std::map<ThetaId, ThetaMatrix> thetas_;
  std::unique_ptr<std::shared_mutex> mutex_;
};

}  // namespace qrv
