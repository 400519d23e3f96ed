#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace qrv {

enum class Variant { signed_symmetric, absolute };

// scaling: E[q^r]. quarticity: E[|U_(a)|^4 + |U_(b)|^4], the normaliser of
// the quarticity estimator.
enum class MomentKind { scaling, quarticity };

enum class Method { monte_carlo, integration, closed_form };

std::string to_string(Variant v);
std::string to_string(MomentKind k);
std::string to_string(Method m);
Variant parse_variant(const std::string& s);
MomentKind parse_moment_kind(const std::string& s);
Method parse_method(const std::string& s);

// Rank lambda*m of a quantile inside a block of length m, validated to be an
// integer within 1e-9. The signed variant also requires 1/2 < lambda < 1;
// the absolute variant requires 0 <= lambda < 1 and a rank of at least 1.
int quantile_rank(int m, double lambda, Variant variant);

class QuantileVector {
 public:
  QuantileVector() = default;
  explicit QuantileVector(std::vector<double> lambdas,
                          Variant variant = Variant::signed_symmetric);

  [[nodiscard]] std::span<const double> values() const noexcept { return lambdas_; }
  [[nodiscard]] std::size_t size() const noexcept { return lambdas_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return lambdas_[i]; }
  [[nodiscard]] Variant variant() const noexcept { return variant_; }
  [[nodiscard]] double max() const { return lambdas_.back(); }

 private:
  std::vector<double> lambdas_;
  Variant variant_ = Variant::signed_symmetric;
};

struct MomentKey {
  int m = 0;
  double lambda = 0.0;
  std::optional<double> lambda2;  // cross-moment E[q(lambda) q(lambda2)]
  double r = 1.0;
  Variant variant = Variant::signed_symmetric;
  MomentKind kind = MomentKind::scaling;
  std::optional<int> lag;  // windows offset by lag inside m+lag draws

  // Throws ConfigError on any invariant violation.
  void validate() const;
  [[nodiscard]] std::string to_string() const;

  // Ordering and equality use integer ranks, so 0.9 and 0.9000000000001
  // name the same constant.
  [[nodiscard]] std::strong_ordering operator<=>(const MomentKey& o) const;
  [[nodiscard]] bool operator==(const MomentKey& o) const {
    return (*this <=> o) == std::strong_ordering::equal;
  }
};

MomentKey scaling_key(int m, double lambda, Variant variant = Variant::signed_symmetric);
MomentKey quarticity_key(int m, double lambda, Variant variant = Variant::signed_symmetric);

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::monte_carlo;
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;
};

struct MonteCarloConfig {
  std::uint64_t replications = 10'000'000;
  std::uint64_t seed = 2010;
  unsigned workers = 1;
  std::uint64_t chunk = 1u << 16;  // replications per substream
};

struct IntegrationConfig {
  double tolerance = 1e-10;
  double truncation = 8.0;
};

using Precision = std::variant<MonteCarloConfig, IntegrationConfig>;

// Exact values where known: absolute variant with (m=2, rank 1), the
// MinRV normaliser, and (m=3, rank 2), the MedRV normaliser.
std::optional<MomentEstimate> closed_form_moment(const MomentKey& key);

MomentEstimate nu_moment(const MomentKey& key, const Precision& precision);

// One Monte Carlo pass for several keys sharing (m, variant, lag = none).
// Each key's estimate is bit-identical to a standalone nu_moment call with
// the same config.
std::vector<MomentEstimate> nu_moments(std::span<const MomentKey> keys,
                                       const MonteCarloConfig& mc);

// m -> infinity limit: 2 c_lambda^{2r} (signed) or d_lambda^r (absolute),
// with c the normal and d the chi-square(1) quantile.
double nu_asymptotic(double lambda, Variant variant, double r = 1.0);
double nu_iq_asymptotic(double lambda, Variant variant);

MomentEstimate nu_iq(int m, double lambda, const Precision& precision,
                     Variant variant = Variant::signed_symmetric);

// Joint density of (U_(m-lambda*m+1), U_(lambda*m)) at (x, y) for i.i.d.
// standard normals. Zero unless x < y. Throws when the two ranks coincide.
double joint_order_stat_density(double x, double y, int m, double lambda);

// Integral of g(x, y) against the joint density over x < y, truncated to
// [-truncation, truncation]^2.
template <class G>
double integrate_joint_density(int m, double lambda, G&& g, const IntegrationConfig& cfg);

// Ranks (1-based, ascending) selected from x in place. x is permuted.
void select_order_stats(std::span<double> x, std::span<const int> ranks_ascending,
                        std::span<double> out);

namespace detail {
double integrate_2d(int m, double lambda, double (*g)(double, double, void*), void* ctx,
                    const IntegrationConfig& cfg);
}

template <class G>
double integrate_joint_density(int m, double lambda, G&& g, const IntegrationConfig& cfg) {
  auto thunk = [](double x, double y, void* ctx) -> double {
    return (*static_cast<std::remove_reference_t<G>*>(ctx))(x, y);
  };
  return detail::integrate_2d(m, lambda, thunk, const_cast<void*>(static_cast<const void*>(&g)), cfg);
}

}  // namespace qrv
