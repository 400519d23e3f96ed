#include "qrv/order_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mc_reduce.hpp"
#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "qrv/parallel.hpp"
#include "qrv/rng.hpp"

namespace qrv {

std::string to_string(Variant v) {
  return v == Variant::signed_symmetric ? "signed" : "absolute";
}

std::string to_string(MomentKind k) {
  return k == MomentKind::scaling ? "scaling" : "quarticity";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::monte_carlo: return "monte-carlo";
    case Method::integration: return "integration";
    case Method::closed_form: return "closed-form";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  if (s == "signed" || s == "signed-symmetric") return Variant::signed_symmetric;
  if (s == "absolute") return Variant::absolute;
  throw ConfigError("unknown variant '" + s + "'");
}

MomentKind parse_moment_kind(const std::string& s) {
  if (s == "scaling") return MomentKind::scaling;
  if (s == "quarticity") return MomentKind::quarticity;
  throw ConfigError("unknown moment kind '" + s + "'");
}

Method parse_method(const std::string& s) {
  if (s == "monte-carlo") return Method::monte_carlo;
  if (s == "integration") return Method::integration;
  if (s == "closed-form") return Method::closed_form;
  throw ConfigError("unknown method '" + s + "'");
}

int quantile_rank(int m, double lambda, Variant variant) {
  if (m < 1) throw ConfigError("block length m must be positive");
  if (!std::isfinite(lambda)) throw ConfigError("quantile must be finite");
  if (variant == Variant::signed_symmetric) {
    if (!(lambda > 0.5 && lambda < 1.0))
      throw ConfigError("signed quantile must lie in (1/2, 1), got " + std::to_string(lambda));
  } else if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw ConfigError("absolute quantile must lie in [0, 1), got " + std::to_string(lambda));
  }
  const double lm = lambda * m;
  const double rounded = std::round(lm);
  if (std::abs(lm - rounded) >= 1e-9) {
    std::ostringstream os;
    os << "lambda*m must be an integer: lambda=" << lambda << ", m=" << m;
    throw ConfigError(os.str());
  }
  const int rank = static_cast<int>(rounded);
  if (rank < 1) throw ConfigError("quantile rank lambda*m must be at least 1");
  return rank;
}

QuantileVector::QuantileVector(std::vector<double> lambdas, Variant variant)
    : lambdas_(std::move(lambdas)), variant_(variant) {
  if (lambdas_.empty()) throw ConfigError("quantile vector must not be empty");
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    const double l = lambdas_[i];
    const bool ok = variant_ == Variant::signed_symmetric ? (l > 0.5 && l < 1.0)
                                                          : (l >= 0.0 && l < 1.0);
    if (!ok) throw ConfigError("quantile " + std::to_string(l) + " outside the legal range");
    if (i > 0 && !(l > lambdas_[i - 1]))
      throw ConfigError("quantiles must be strictly increasing");
  }
}

void MomentKey::validate() const {
  quantile_rank(m, lambda, variant);
  if (lambda2) quantile_rank(m, *lambda2, variant);
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("moment power r must be positive");
  if (lag && (*lag < 0 || *lag > m)) throw ConfigError("lag must lie in [0, m]");
  if (kind == MomentKind::quarticity && (lambda2 || lag || r != 1.0))
    throw ConfigError("quarticity moments take a single quantile with r = 1");
  if ((lambda2 || lag) && r != 1.0) throw ConfigError("cross moments require r = 1");
}

std::string MomentKey::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << qrv::to_string(variant) << '/' << qrv::to_string(kind) << "/m=" << m
     << "/lambda=" << lambda;
  if (lambda2) os << "/lambda2=" << *lambda2;
  os << "/r=" << r;
  if (lag) os << "/lag=" << *lag;
  return os.str();
}

std::strong_ordering MomentKey::operator<=>(const MomentKey& o) const {
  auto rank_of = [](int mm, double l) { return static_cast<long>(std::llround(l * mm)); };
  if (auto c = variant <=> o.variant; c != 0) return c;
  if (auto c = kind <=> o.kind; c != 0) return c;
  if (auto c = m <=> o.m; c != 0) return c;
  if (auto c = rank_of(m, lambda) <=> rank_of(o.m, o.lambda); c != 0) return c;
  const long r2 = lambda2 ? rank_of(m, *lambda2) : -1;
  const long o2 = o.lambda2 ? rank_of(o.m, *o.lambda2) : -1;
  if (auto c = r2 <=> o2; c != 0) return c;
  if (r < o.r) return std::strong_ordering::less;
  if (r > o.r) return std::strong_ordering::greater;
  return lag.value_or(-1) <=> o.lag.value_or(-1);
}

MomentKey scaling_key(int m, double lambda, Variant variant) {
  MomentKey k;
  k.m = m;
  k.lambda = lambda;
  k.variant = variant;
  return k;
}

MomentKey quarticity_key(int m, double lambda, Variant variant) {
  MomentKey k = scaling_key(m, lambda, variant);
  k.kind = MomentKind::quarticity;
  return k;
}

void select_order_stats(std::span<double> x, std::span<const int> ranks_ascending,
                        std::span<double> out) {
  if (x.size() <= 64 || ranks_ascending.size() > 8) {
    std::sort(x.begin(), x.end());
    for (std::size_t i = 0; i < ranks_ascending.size(); ++i) out[i] = x[ranks_ascending[i] - 1];
    return;
  }
  auto lo = x.begin();
  for (std::size_t i = 0; i < ranks_ascending.size(); ++i) {
    auto nth = x.begin() + (ranks_ascending[i] - 1);
    if (nth >= lo) {
      std::nth_element(lo, nth, x.end());
      lo = nth + 1;
    }
    out[i] = *nth;
  }
}

std::optional<MomentEstimate> closed_form_moment(const MomentKey& key) {
  if (key.variant != Variant::absolute || key.kind != MomentKind::scaling || key.r != 1.0 ||
      key.lambda2 || key.lag)
    return std::nullopt;
  const long rank = std::llround(key.lambda * key.m);
  MomentEstimate e;
  e.method = Method::closed_form;
  if (key.m == 2 && rank == 1) {
    e.value = 1.0 - 2.0 / std::numbers::pi;
    return e;
  }
  if (key.m == 3 && rank == 2) {
    e.value = (6.0 - 4.0 * std::sqrt(3.0) + std::numbers::pi) / std::numbers::pi;
    return e;
  }
  return std::nullopt;
}

namespace {

// Ranks used by a key: signed {m-b+1, b}, absolute {b}.
struct KeyRanks {
  int lo = 0;
  int hi = 0;
  int lo2 = 0;
  int hi2 = 0;
};

KeyRanks ranks_of(const MomentKey& k) {
  KeyRanks kr;
  kr.hi = quantile_rank(k.m, k.lambda, k.variant);
  kr.lo = k.variant == Variant::signed_symmetric ? k.m - kr.hi + 1 : kr.hi;
  if (k.lambda2) {
    kr.hi2 = quantile_rank(k.m, *k.lambda2, k.variant);
    kr.lo2 = k.variant == Variant::signed_symmetric ? k.m - kr.hi2 + 1 : kr.hi2;
  }
  return kr;
}

std::uint64_t pass_seed(std::uint64_t seed, int m, Variant v, int lag) {
  const std::uint64_t tag = static_cast<std::uint64_t>(m) |
                            (static_cast<std::uint64_t>(lag + 1) << 32) |
                            (static_cast<std::uint64_t>(v == Variant::absolute) << 62);
  return replication_seed(seed, tag);
}

// Value of the quantity behind one key, given order statistics by rank.
double key_quantity(const MomentKey& k, const KeyRanks& kr, std::span<const double> os) {
  const double a = os[kr.lo];
  const double b = os[kr.hi];
  const bool sym = k.variant == Variant::signed_symmetric;
  if (k.kind == MomentKind::quarticity) {
    const double a2 = a * a;
    const double b2 = b * b;
    return sym ? a2 * a2 + b2 * b2 : b2 * b2;
  }
  const double q = sym ? a * a + b * b : b * b;
  if (k.lambda2) {
    const double c = os[kr.lo2];
    const double d = os[kr.hi2];
    return q * (sym ? c * c + d * d : d * d);
  }
  return k.r == 1.0 ? q : std::pow(q, k.r);
}

void check_mc(const MonteCarloConfig& mc) {
  if (mc.replications < 100'000)
    throw ConfigError("Monte Carlo moments need at least 1e5 replications");
  if (mc.chunk == 0) throw ConfigError("Monte Carlo chunk size must be positive");
}

}  // namespace

namespace detail {

std::vector<MomentSums> moment_chunks(std::span<const MomentKey> keys, const MonteCarloConfig& mc) {
  const int m = keys.front().m;
  const Variant variant = keys.front().variant;
  std::vector<KeyRanks> kranks;
  std::vector<int> ranks;
  for (const auto& k : keys) {
    kranks.push_back(ranks_of(k));
    const auto& kr = kranks.back();
    ranks.insert(ranks.end(), {kr.lo, kr.hi});
    if (k.lambda2) ranks.insert(ranks.end(), {kr.lo2, kr.hi2});
  }
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());

  const std::uint64_t seed = pass_seed(mc.seed, m, variant, -1);
  const std::size_t nk = keys.size();
  const std::uint64_t n_chunks = (mc.replications + mc.chunk - 1) / mc.chunk;

  return map_chunks<MomentSums>(n_chunks, mc.workers, [&](std::size_t c) {
    const std::uint64_t begin = c * mc.chunk;
    const std::uint64_t reps = std::min(mc.chunk, mc.replications - begin);
    NormalSource normals(seed, Stream::constants, c);
    std::vector<double> draws(m);
    std::vector<double> picked(ranks.size());
    std::vector<double> os(m + 1);
    MomentSums s(nk);
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
      normals.fill(draws);
      if (variant == Variant::absolute)
        for (double& d : draws) d = std::abs(d);
      select_order_stats(draws, ranks, picked);
      for (std::size_t i = 0; i < ranks.size(); ++i) os[ranks[i]] = picked[i];
      for (std::size_t j = 0; j < nk; ++j) s.add(j, key_quantity(keys[j], kranks[j], os));
    }
    s.count = reps;
    return s;
  });

}

}  // namespace detail

namespace {

std::vector<MomentEstimate> joint_pass(std::span<const MomentKey> keys, const MonteCarloConfig& mc) {
  const auto chunks = detail::moment_chunks(keys, mc);
  std::vector<MomentEstimate> out(keys.size());
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const auto [mean, se] = detail::reduce_mean(chunks, j);
    out[j] = {mean, se, Method::monte_carlo, mc.replications, mc.seed};
  }
  return out;
}


MomentEstimate lagged_pass(const MomentKey& k, const MonteCarloConfig& mc) {
  const int m = k.m;
  const int lag = *k.lag;
  MomentKey single = k;
  single.lag.reset();
  single.lambda2.reset();
  MomentKey other = single;
  other.lambda = k.lambda2.value_or(k.lambda);
  const KeyRanks r1 = ranks_of(single);
  const KeyRanks r2 = ranks_of(other);
  std::vector<int> ranks1{r1.lo, r1.hi};
  std::vector<int> ranks2{r2.lo, r2.hi};
  std::sort(ranks1.begin(), ranks1.end());
  std::sort(ranks2.begin(), ranks2.end());
  ranks1.erase(std::unique(ranks1.begin(), ranks1.end()), ranks1.end());
  ranks2.erase(std::unique(ranks2.begin(), ranks2.end()), ranks2.end());

  const std::uint64_t seed = pass_seed(mc.seed, m, k.variant, lag);
  const std::uint64_t n_chunks = (mc.replications + mc.chunk - 1) / mc.chunk;
  auto chunks = map_chunks<detail::MomentSums>(n_chunks, mc.workers, [&](std::size_t c) {
    const std::uint64_t reps = std::min(mc.chunk, mc.replications - c * mc.chunk);
    NormalSource normals(seed, Stream::constants, c);
    std::vector<double> draws(m + lag);
    std::vector<double> w(m);
    std::vector<double> picked(2);
    std::vector<double> os(m + 1);
    detail::MomentSums s(1);
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
      normals.fill(draws);
      if (k.variant == Variant::absolute)
        for (double& d : draws) d = std::abs(d);
      std::copy_n(draws.begin(), m, w.begin());
      select_order_stats(w, ranks1, picked);
      for (std::size_t i = 0; i < ranks1.size(); ++i) os[ranks1[i]] = picked[i];
      const double q0 = key_quantity(single, r1, os);
      std::copy_n(draws.begin() + lag, m, w.begin());
      select_order_stats(w, ranks2, picked);
      for (std::size_t i = 0; i < ranks2.size(); ++i) os[ranks2[i]] = picked[i];
      const double qk = key_quantity(other, r2, os);
      s.add(0, q0 * qk);
    }
    s.count = reps;
    return s;
  });
  const auto [mean, se] = detail::reduce_mean(chunks, 0);
  return {mean, se, Method::monte_carlo, mc.replications, mc.seed};
}

double log_phi_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2)); }
double log_phi_sf(double x) { return std::log(0.5 * std::erfc(x / std::numbers::sqrt2)); }
double log_phi_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

double cdf_gap(double x, double y) {
  if (y <= 0.0) return 0.5 * (std::erfc(-y / std::numbers::sqrt2) - std::erfc(-x / std::numbers::sqrt2));
  if (x >= 0.0) return 0.5 * (std::erfc(x / std::numbers::sqrt2) - std::erfc(y / std::numbers::sqrt2));
  return normal_cdf(y) - normal_cdf(x);
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Density of the a-th order statistic of m standard normals.
double single_order_stat_density(double x, int m, int a) {
  const double logc = log_factorial(m) - log_factorial(a - 1) - log_factorial(m - a);
  double lf = logc + log_phi_pdf(x);
  if (a > 1) lf += (a - 1) * log_phi_cdf(x);
  if (m > a) lf += (m - a) * log_phi_sf(x);
  return std::exp(lf);
}

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 15;

}  // namespace

double joint_order_stat_density(double x, double y, int m, double lambda) {
  const int b = quantile_rank(m, lambda, Variant::signed_symmetric);
  const int a = m - b + 1;
  if (a == b) throw ConfigError("joint density undefined: the two quantile ranks coincide");
  if (!(x < y)) return 0.0;
  const double logc = log_factorial(m) - log_factorial(a - 1) - log_factorial(b - a - 1) -
                      log_factorial(m - b);
  double lf = logc + log_phi_pdf(x) + log_phi_pdf(y);
  if (a > 1) lf += (a - 1) * log_phi_cdf(x);
  if (m > b) lf += (m - b) * log_phi_sf(y);
  if (b - a - 1 > 0) {
    const double gap = cdf_gap(x, y);
    if (gap <= 0.0) return 0.0;
    lf += (b - a - 1) * std::log(gap);
  }
  return std::exp(lf);
}

namespace detail {

double integrate_2d(int m, double lambda, double (*g)(double, double, void*), void* ctx,
                    const IntegrationConfig& cfg) {
  const double t = cfg.truncation;
  auto outer = [&](double y) {
    auto inner = [&](double x) { return g(x, y, ctx) * joint_order_stat_density(x, y, m, lambda); };
    return GK::integrate(inner, -t, y, kMaxDepth, cfg.tolerance);
  };
  return GK::integrate(outer, -t, t, kMaxDepth, cfg.tolerance);
}

}  // namespace detail

MomentEstimate nu_moment(const MomentKey& key, const Precision& precision) {
  key.validate();
  if (auto cf = closed_form_moment(key)) return *cf;
  if (const auto* mc = std::get_if<MonteCarloConfig>(&precision)) {
    check_mc(*mc);
    if (key.lag) return lagged_pass(key, *mc);
    return joint_pass(std::span(&key, 1), *mc).front();
  }
  const auto& ic = std::get<IntegrationConfig>(precision);
  if (key.variant != Variant::signed_symmetric || key.kind != MomentKind::scaling ||
      key.r != 1.0 || key.lambda2 || key.lag)
    throw ConfigError("integration backend supports only signed r=1 scaling moments: " +
                      key.to_string());
  const int b = quantile_rank(key.m, key.lambda, key.variant);
  const int a = key.m - b + 1;
  MomentEstimate e;
  e.method = Method::integration;
  if (a == b) {
    auto f = [&](double x) { return 2.0 * x * x * single_order_stat_density(x, key.m, a); };
    e.value = GK::integrate(f, -ic.truncation, ic.truncation, kMaxDepth, ic.tolerance);
  } else {
    e.value = integrate_joint_density(
        key.m, key.lambda, [](double x, double y) { return x * x + y * y; }, ic);
  }
  return e;
}

std::vector<MomentEstimate> nu_moments(std::span<const MomentKey> keys, const MonteCarloConfig& mc) {
  if (keys.empty()) return {};
  check_mc(mc);
  std::vector<std::size_t> todo;
  std::vector<MomentEstimate> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    k.validate();
    if (k.m != keys.front().m || k.variant != keys.front().variant || k.lag)
      throw ConfigError("joint moment pass needs keys sharing m and variant without lag");
    if (auto cf = closed_form_moment(k))
      out[i] = *cf;
    else
      todo.push_back(i);
  }
  if (todo.empty()) return out;
  std::vector<MomentKey> sub;
  for (auto i : todo) sub.push_back(keys[i]);
  const auto est = joint_pass(sub, mc);
  for (std::size_t j = 0; j < todo.size(); ++j) out[todo[j]] = est[j];
  return out;
}

double nu_asymptotic(double lambda, Variant variant, double r) {
  if (variant == Variant::signed_symmetric) {
    if (!(lambda > 0.5 && lambda < 1.0)) throw ConfigError("signed quantile must lie in (1/2, 1)");
    const double c = normal_quantile(lambda);
    return 2.0 * std::pow(c * c, r);
  }
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("absolute quantile must lie in (0, 1)");
  return std::pow(chi2_1_quantile(lambda), r);
}

double nu_iq_asymptotic(double lambda, Variant variant) {
  return nu_asymptotic(lambda, variant, 2.0);
}

MomentEstimate nu_iq(int m, double lambda, const Precision& precision, Variant variant) {
  return nu_moment(quarticity_key(m, lambda, variant), precision);
}

}  // namespace qrv
