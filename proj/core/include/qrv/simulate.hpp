#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qrv/estimators.hpp"

namespace qrv {

enum class ModelKind { bm, sv, sv_lev, sev_nd, sv2f_lev };
std::string to_string(ModelKind k);
// Accepts BM, SV, SV-LEV, SEV-ND, SV2F-LEV (case-insensitive).
ModelKind parse_model_kind(const std::string& s);

// Parameter names per model (defaults in parentheses):
//   BM        sigma2 (0.0391)
//   SV        kappa_theta (0.3141) kappa (8.0369) xi2 (0.1827) rho (0) v0 (kappa_theta / kappa)
//   SV-LEV    as SV with rho (-0.75)
//   SEV-ND    a0 (-0.554) a1 (21.32) a2 (-209.3) a3 (0.005) b1 (0.017) b2 (53.97) p (5.76)
//             v0 (stable zero of the drift), floor (1e-8)
//   SV2F-LEV  b0 (-1.2) b1 (0.04) b2 (1.5) k1 (0.000137) k2 (1.386) beta (0.25)
//             rho1 (-0.3) rho2 (-0.3) f1_0 (0) f2_0 (0) splice (log 1.5)
struct ModelSpec {
  ModelKind kind = ModelKind::bm;
  std::map<std::string, double> params;  // overrides of the defaults

  static ModelSpec defaults(ModelKind kind);
  [[nodiscard]] double param(const std::string& name) const;
  // Unknown names, |rho| > 1 and negative diffusion coefficients are rejected.
  void validate() const;
};

// e^u below the splice point u0, e^u0 sqrt(1 - u0 + u^2 / u0) above it.
double spliced_exp(double u, double u0);

struct PathResult {
  std::vector<double> log_prices;  // N + 1 values, starting at 0
  double true_iv = 0.0;
  double true_iq = 0.0;
  std::vector<std::size_t> jump_times;  // 1-based return indices
  std::vector<double> jump_sizes;
  std::optional<std::size_t> outlier_index;  // price index
  std::optional<double> outlier_size;
  std::optional<double> noise_omega2;
  std::string model;
  std::uint64_t seed = 0;
  int substeps = 0;
  std::size_t truncations = 0;  // fine steps where the variance hit its floor

  [[nodiscard]] std::size_t n() const noexcept { return log_prices.empty() ? 0 : log_prices.size() - 1; }
  [[nodiscard]] ReturnSeries returns() const;
};

// Euler scheme on [0, 1] with N * substeps fine steps, full truncation of
// the variance, and N observed log-prices. IV and IQ accumulate the
// left-point variance over the fine grid.
PathResult simulate_path(const ModelSpec& model, std::size_t n, std::uint64_t seed, int substeps = 10);

// n_j i.i.d. normal jumps rescaled so their squares sum to v_j * IV, added
// at distinct uniformly drawn returns.
PathResult add_jumps(PathResult path, std::size_t n_j, double v_j, std::uint64_t seed);

// One interior log-price shifted by +-o with 2 o^2 = v_o * IV.
PathResult add_outlier(PathResult path, double v_o, std::uint64_t seed);

// i.i.d. N(0, omega^2) on every log-price with omega^2 = gamma2 * IV / N.
PathResult add_noise(PathResult path, double gamma2, std::uint64_t seed);

}  // namespace qrv
