#include "qrv/preaveraging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "qrv/parallel.hpp"
#include "qrv/rng.hpp"
#include "sorted_window.hpp"

namespace qrv {

WeightFunction::WeightFunction(std::vector<double> knots, std::vector<double> values, std::string name)
    : knots_(std::move(knots)), values_(std::move(values)), name_(std::move(name)) {}

WeightFunction WeightFunction::triangular() { return WeightFunction({0.0, 0.5, 1.0}, {0.0, 0.5, 0.0}, "triangular"); }

WeightFunction WeightFunction::tabulated(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() != values.size()) throw ConfigError("weight table needs one value per knot");
  if (knots.size() < 3) throw ConfigError("weight table needs at least three knots");
  if (knots.front() != 0.0 || knots.back() != 1.0) throw ConfigError("weight table knots must run from 0 to 1");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) throw ConfigError("weight table must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1])) throw ConfigError("weight table knots must be strictly increasing");
  }
  if (values.front() != 0.0 || values.back() != 0.0) throw ConfigError("weight function must vanish at 0 and 1");
  WeightFunction h(std::move(knots), std::move(values), "tabulated");
  if (!(h.psi2() > 0.0)) throw ConfigError("weight function must not vanish identically");
  return h;
}

double WeightFunction::operator()(double x) const {
  if (!(x > 0.0) || !(x < 1.0)) return 0.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto i = static_cast<std::size_t>(it - knots_.begin());
  const double t = (x - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
  return values_[i - 1] + t * (values_[i] - values_[i - 1]);
}

double WeightFunction::derivative(double x) const {
  if (!(x >= 0.0) || !(x < 1.0)) return 0.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto i = static_cast<std::size_t>(it - knots_.begin());
  return (values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]);
}

namespace {

// Breakpoints of y -> (h(y), h(y+u)) on [0, 1-u].
std::vector<double> lag_breaks(std::span<const double> knots, double u) {
  const double top = 1.0 - u;
  std::vector<double> b{0.0, top};
  for (double k : knots) {
    if (k > 0.0 && k < top) b.push_back(k);
    if (k - u > 0.0 && k - u < top) b.push_back(k - u);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

void check_lag(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw ConfigError("lag u must lie in [0, 1]");
}

}  // namespace

double WeightFunction::w(double u) const {
  check_lag(u);
  if (u == 1.0) return 0.0;
  const auto b = lag_breaks(knots_, u);
  CompensatedSum s;
  // The integrand is quadratic between breakpoints, so Simpson is exact.
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double a = b[i], c = b[i + 1], mid = 0.5 * (a + c);
    auto f = [&](double y) { return (*this)(y) * (*this)(y + u); };
    s.add((c - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(c)));
  }
  return s.value();
}

double WeightFunction::w_prime(double u) const {
  check_lag(u);
  if (u == 1.0) return 0.0;
  const auto b = lag_breaks(knots_, u);
  CompensatedSum s;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double mid = 0.5 * (b[i] + b[i + 1]);
    s.add((b[i + 1] - b[i]) * derivative(mid) * derivative(mid + u));
  }
  return s.value();
}

double WeightFunction::psi1() const { return w_prime(0.0); }
double WeightFunction::psi2() const { return w(0.0); }

PsiConstants psi_constants(int K, const WeightFunction& h, std::size_t n) {
  if (K < 2) throw ConfigError("pre-averaging window K must be at least 2");
  if (n == 0) throw ConfigError("sample size must be positive");
  CompensatedSum s1, s2;
  const double dk = K;
  for (int j = 1; j <= K; ++j) {
    const double d = h(j / dk) - h((j - 1) / dk);
    s1.add(d * d);
    if (j < K) s2.add(h(j / dk) * h(j / dk));
  }
  PsiConstants p;
  p.psi1_n = dk * s1.value();
  p.psi2_n = s2.value() / dk;
  p.psi1 = h.psi1();
  p.psi2 = h.psi2();
  p.c_empirical = dk / std::sqrt(static_cast<double>(n));
  return p;
}

std::vector<double> preaveraged_returns(const ReturnSeries& series, int K, const WeightFunction& h) {
  if (K < 2) throw ConfigError("pre-averaging window K must be at least 2");
  const std::size_t n = series.size();
  const auto k = static_cast<std::size_t>(K);
  if (n < k) throw DataError("pre-averaging needs N >= K: N=" + std::to_string(n) + ", K=" + std::to_string(K));
  std::vector<double> g(k - 1);
  for (std::size_t i = 1; i < k; ++i) g[i - 1] = h(static_cast<double>(i) / K);
  const auto& r = series.returns;
  std::vector<double> out(n - k + 2);
  // out[j] = sum_{i=1}^{K-1} g_i r_{j+i} with r 1-based, i.e. r[j+i-1] here.
  for (std::size_t j = 0; j < out.size(); ++j) {
    CompensatedSum s;
    for (std::size_t i = 0; i + 1 < k; ++i) s.add(g[i] * r[j + i]);
    out[j] = s.value();
  }
  return out;
}

std::string to_string(NoiseMethod m) { return m == NoiseMethod::autocovariance ? "autocovariance" : "half-rv"; }

NoiseMethod parse_noise_method(const std::string& s) {
  if (s == "autocovariance") return NoiseMethod::autocovariance;
  if (s == "half-rv" || s == "half_rv") return NoiseMethod::half_rv;
  throw ConfigError("unknown noise method '" + s + "'");
}

NoiseEstimate noise_variance(const ReturnSeries& series, NoiseMethod method) {
  const auto& r = series.returns;
  const std::size_t n = r.size();
  if (n < 2) throw DataError("noise variance needs N >= 2");
  NoiseEstimate e;
  e.method = method;
  CompensatedSum s;
  if (method == NoiseMethod::half_rv) {
    for (double x : r) s.add(x * x);
    e.omega2 = s.value() / (2.0 * static_cast<double>(n));
    return e;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) s.add(r[i + 1] * r[i]);
  const double raw = -s.value() / static_cast<double>(n - 1);
  if (raw < 0.0) {
    e.clamped = true;
    e.omega2 = 0.0;
  } else {
    e.omega2 = raw;
  }
  return e;
}

QuantileConfig PreAvgConfig::quantile_config() const {
  QuantileConfig q;
  q.lambdas = lambdas;
  q.weights = weights;
  q.m = m;
  q.mode = Mode::blocked;
  return q;
}

void PreAvgConfig::validate() const {
  if (K < 2) throw ConfigError("pre-averaging window K must be at least 2");
  if (!(h.psi2() > 0.0)) throw ConfigError("weight function must not vanish identically");
  quantile_config().validate();
}

namespace {

struct Ranks {
  int lo;
  int hi;
};

// Raw squared-quantile statistic of every window {ybar_{i + j stride}}, j < m,
// for i = 0..len - 1 - (m-1) stride. One sliding window per residue class.
std::vector<std::vector<double>> window_stats(std::span<const double> ybar, std::size_t stride, int m,
                                              const QuantileConfig& q) {
  const bool absolute = q.variant() == Variant::absolute;
  std::vector<Ranks> ranks;
  for (double l : q.lambdas.values()) {
    const int hi = quantile_rank(m, l, q.variant());
    ranks.push_back({absolute ? hi : m - hi + 1, hi});
  }
  const auto mm = static_cast<std::size_t>(m);
  const std::size_t span = (mm - 1) * stride;
  const std::size_t windows = ybar.size() - span;
  std::vector<double> y(ybar.begin(), ybar.end());
  if (absolute)
    for (double& v : y) v = std::abs(v);
  std::vector<std::vector<double>> out(ranks.size(), std::vector<double>(windows));
  std::vector<double> first(mm);
  for (std::size_t r = 0; r < stride && r < windows; ++r) {
    for (std::size_t j = 0; j < mm; ++j) first[j] = y[r + j * stride];
    detail::SortedWindow w(first);
    for (std::size_t i = r; i < windows; i += stride) {
      if (i != r) w.slide(y[i - stride], y[i + span]);
      for (std::size_t s = 0; s < ranks.size(); ++s) {
        const double hi = w.at(ranks[s].hi);
        double v = hi * hi;
        if (!absolute) {
          const double lo = w.at(ranks[s].lo);
          v += lo * lo;
        }
        out[s][i] = v;
      }
    }
  }
  return out;
}

struct StarTerms {
  std::vector<std::vector<double>> q;  // sqrt(N) * raw / nu, per quantile
  PsiConstants psi;
  std::size_t big_m = 0;
};

StarTerms star_terms(const ReturnSeries& series, const PreAvgConfig& config, const ScalingTable& scaling) {
  config.validate();
  const std::size_t n = series.size();
  const auto stride = static_cast<std::size_t>(config.K - 1);
  const std::size_t big_m = static_cast<std::size_t>(config.m) * stride;
  if (n < big_m || n < static_cast<std::size_t>(config.K))
    throw DataError("series too short for pre-averaged blocks: N=" + std::to_string(n) +
                    " < m(K-1)=" + std::to_string(big_m));
  const auto qc = config.quantile_config();
  StarTerms t;
  t.big_m = big_m;
  t.psi = psi_constants(config.K, config.h, n);
  const auto ybar = preaveraged_returns(series, config.K, config.h);
  t.q = window_stats(ybar, stride, config.m, qc);
  const auto keys = required_keys(qc);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t s = 0; s < keys.size(); ++s) {
    const double f = root_n / scaling.get(keys[s]).value;
    for (double& v : t.q[s]) v *= f;
  }
  return t;
}

}  // namespace

EstimateResult qrv_star(const ReturnSeries& series, const PreAvgConfig& config, const ScalingTable& scaling,
                        const NoiseEstimate& noise) {
  if (!(noise.omega2 >= 0.0)) throw ConfigError("noise variance must be nonnegative");
  const auto t = star_terms(series, config, scaling);
  const double c = t.psi.c_empirical;
  const std::size_t windows = t.q.front().size();
  CompensatedSum total;
  for (std::size_t s = 0; s < t.q.size(); ++s) {
    const double comp = compensated_sum(t.q[s]) / (c * t.psi.psi2_n * static_cast<double>(windows));
    total.add(config.weights[s] * comp);
  }
  const double correction = t.psi.psi1_n * noise.omega2 / (c * c * t.psi.psi2_n);
  EstimateResult r;
  r.value = total.value() - correction;
  r.diagnostics["c_empirical"] = c;
  r.diagnostics["windows"] = static_cast<double>(windows);
  r.diagnostics["bias_correction"] = correction;
  r.diagnostics["omega2"] = noise.omega2;
  r.diagnostics["noise_clamped"] = noise.clamped ? 1.0 : 0.0;
  return r;
}

QrvStarAvar qrv_star_avar(const ReturnSeries& series, const PreAvgConfig& config, const ScalingTable& scaling) {
  config.validate();
  const std::size_t n = series.size();
  const std::size_t big_m = static_cast<std::size_t>(config.m) * static_cast<std::size_t>(config.K - 1);
  if (n < 3 * big_m)
    throw DataError("variance estimate needs N >= 3m(K-1): N=" + std::to_string(n) +
                    ", 3m(K-1)=" + std::to_string(3 * big_m));
  const auto t = star_terms(series, config, scaling);
  const std::size_t k = t.q.size();
  const std::size_t lo = big_m - 1;
  const std::size_t hi = n - 2 * big_m;
  const std::size_t count = hi - lo + 1;
  const double width = static_cast<double>(2 * big_m - 1);

  std::vector<std::vector<double>> prefix(k);
  for (std::size_t s = 0; s < k; ++s) {
    prefix[s].resize(t.q[s].size() + 1);
    CompensatedSum run;
    prefix[s][0] = 0.0;
    for (std::size_t i = 0; i < t.q[s].size(); ++i) {
      run.add(t.q[s][i]);
      prefix[s][i + 1] = run.value();
    }
  }
  const double c = t.psi.c_empirical;
  const double pre =
      1.0 / (c * t.psi.psi2_n * t.psi.psi2_n * static_cast<double>(config.K - 1) * static_cast<double>(count));
  Eigen::MatrixXd v(k, k);
  for (std::size_t s = 0; s < k; ++s) {
    for (std::size_t l = 0; l < k; ++l) {
      CompensatedSum acc;
      for (std::size_t i = lo; i <= hi; ++i) {
        const double inner =
            (prefix[l][i + big_m] - prefix[l][i + 1 - big_m]) - width * t.q[l][i + big_m];
        acc.add(t.q[s][i] * inner);
      }
      v(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(l)) = pre * acc.value();
    }
  }
  QrvStarAvar out;
  out.values = 0.5 * (v + v.transpose());
  out.terms = count;
  for (Eigen::Index s = 0; s < out.values.rows(); ++s) {
    if (out.values(s, s) < 0.0) {
      out.values(s, s) = 0.0;
      ++out.floored_diagonals;
    }
  }
  return out;
}

EstimateResult qrv_star_ci(EstimateResult est, const QrvStarAvar& avar, std::span<const double> weights,
                           std::size_t n, double level) {
  const auto k = static_cast<Eigen::Index>(weights.size());
  if (avar.values.rows() != k || avar.values.cols() != k)
    throw ConfigError("weight count does not match the variance matrix");
  if (n == 0) throw ConfigError("sample size must be positive");
  const double z = normal_critical_value(level);
  Eigen::VectorXd a(k);
  for (Eigen::Index i = 0; i < k; ++i) a(i) = weights[static_cast<std::size_t>(i)];
  const double var = std::max(0.0, a.dot(avar.values * a)) / std::sqrt(static_cast<double>(n));
  const double se = std::sqrt(var);
  est.asymptotic_variance = var;
  est.std_error = se;
  est.ci = ConfidenceInterval{est.value - z * se, est.value + z * se, level};
  est.diagnostics["avar_terms"] = static_cast<double>(avar.terms);
  est.diagnostics["avar_floored_diagonals"] = avar.floored_diagonals;
  return est;
}

namespace {

struct JointCov {
  Eigen::MatrixXd root;  // 2m x 2m, cov = root root'
  double var = 0.0;
  double cross_u = 0.0;
  double cross_1u = 0.0;
};

std::string describe(const FCovarianceParams& p) {
  std::ostringstream os;
  os << "m=" << p.m << " l=" << p.l << " x=" << p.x << " u=" << p.u << " omega2=" << p.omega2 << " c=" << p.c;
  return os.str();
}

JointCov joint_cov(const FCovarianceParams& p) {
  if (p.m < 1) throw ConfigError("block length m must be positive");
  if (p.l < 1 || p.l > p.m) throw ConfigError("lag index l must lie in 1..m");
  check_lag(p.u);
  if (!(p.c > 0.0)) throw ConfigError("c must be positive");
  if (!(p.omega2 >= 0.0)) throw ConfigError("noise variance must be nonnegative");
  const double x2 = p.x * p.x;
  JointCov j;
  j.var = p.c * p.h.psi2() * x2 + p.h.psi1() * p.omega2 / p.c;
  j.cross_u = p.c * p.h.w(p.u) * x2 + p.h.w_prime(p.u) * p.omega2 / p.c;
  j.cross_1u = p.c * p.h.w(1.0 - p.u) * x2 + p.h.w_prime(1.0 - p.u) * p.omega2 / p.c;
  const Eigen::Index m = p.m;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < 2 * m; ++i) cov(i, i) = j.var;
  // S occupies 0..m-1, T occupies m..2m-1; 1-based S_{b+l-1} pairs with T_b.
  for (Eigen::Index b = 0; b < m; ++b) {
    const Eigen::Index a1 = b + p.l - 1;
    const Eigen::Index a2 = b + p.l;
    if (a1 < m) cov(a1, m + b) = cov(m + b, a1) = j.cross_u;
    if (a2 < m) cov(a2, m + b) = cov(m + b, a2) = j.cross_1u;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed for " + describe(p));
  const auto& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -1e-10 * scale)
    throw NumericalError("joint covariance is not positive semidefinite for " + describe(p) +
                         " (smallest eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  j.root = eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return j;
}

struct CovChunk {
  std::vector<double> sum_s, sum_t, sum_st;  // k_s, k_t, k_s * k_t
  std::uint64_t count = 0;
};

std::vector<double> quantile_stats(std::span<double> v, std::span<const Ranks> ranks) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (const auto& r : ranks) {
    const double a = v[static_cast<std::size_t>(r.lo - 1)], b = v[static_cast<std::size_t>(r.hi - 1)];
    out.push_back(a * a + b * b);
  }
  return out;
}

// Covariance matrix of the squared-quantile statistics of S (rows) and T
// (columns), plus standard errors from the spread of per-chunk estimates.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> cov_mc(const JointCov& jc, int m, std::span<const double> lambdas,
                                                   const MonteCarloConfig& mc, std::uint64_t tag) {
  if (mc.replications < 1000) throw ConfigError("covariance oracle needs at least 1000 replications");
  std::vector<Ranks> ranks;
  for (double l : lambdas) {
    const int hi = quantile_rank(m, l, Variant::signed_symmetric);
    ranks.push_back({m - hi + 1, hi});
  }
  const std::size_t k = ranks.size();
  const std::uint64_t per = std::max<std::uint64_t>(500, std::min(mc.chunk, mc.replications / 64));
  const std::size_t chunks = static_cast<std::size_t>((mc.replications + per - 1) / per);
  const std::uint64_t seed = replication_seed(mc.seed, tag);
  const auto dim = static_cast<Eigen::Index>(2 * m);
  auto run = [&](std::size_t c) {
    const std::uint64_t reps = std::min<std::uint64_t>(per, mc.replications - c * per);
    NormalSource z(seed, Stream::oracle, c);
    CovChunk out;
    out.sum_s.assign(k, 0.0);
    out.sum_t.assign(k, 0.0);
    out.sum_st.assign(k * k, 0.0);
    Eigen::VectorXd e(dim), x(dim);
    std::vector<double> s(static_cast<std::size_t>(m)), t(static_cast<std::size_t>(m));
    for (std::uint64_t r = 0; r < reps; ++r) {
      for (Eigen::Index i = 0; i < dim; ++i) e(i) = z();
      x.noalias() = jc.root * e;
      for (int i = 0; i < m; ++i) {
        s[static_cast<std::size_t>(i)] = x(i);
        t[static_cast<std::size_t>(i)] = x(m + i);
      }
      const auto qs = quantile_stats(s, ranks);
      const auto qt = quantile_stats(t, ranks);
      for (std::size_t a = 0; a < k; ++a) {
        out.sum_s[a] += qs[a];
        out.sum_t[a] += qt[a];
        for (std::size_t b = 0; b < k; ++b) out.sum_st[a * k + b] += qs[a] * qt[b];
      }
    }
    out.count = reps;
    return out;
  };
  const auto parts = map_chunks<CovChunk>(chunks, mc.workers, run);
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd value(ki, ki), se(ki, ki);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      CompensatedSum ss, st, sst;
      std::vector<double> local;
      double n = 0.0;
      for (const auto& p : parts) {
        const double cn = static_cast<double>(p.count);
        ss.add(p.sum_s[a]);
        st.add(p.sum_t[b]);
        sst.add(p.sum_st[a * k + b]);
        n += cn;
        local.push_back(p.sum_st[a * k + b] / cn - (p.sum_s[a] / cn) * (p.sum_t[b] / cn));
      }
      const double cov = sst.value() / n - (ss.value() / n) * (st.value() / n);
      double spread = 0.0;
      if (local.size() > 1) {
        const double mean = compensated_sum(local) / static_cast<double>(local.size());
        for (double l : local) spread += (l - mean) * (l - mean);
        spread = std::sqrt(spread / static_cast<double>(local.size() - 1) / static_cast<double>(local.size()));
      }
      value(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = cov;
      se(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = spread;
    }
  }
  return {value, se};
}

std::uint64_t oracle_tag(int m, int l, int node) {
  return (0xDEFull << 40) ^ (static_cast<std::uint64_t>(m) << 24) ^ (static_cast<std::uint64_t>(l) << 8) ^
         static_cast<std::uint64_t>(node);
}

}  // namespace

FCovariance f_covariance_oracle(const FCovarianceParams& p, const MonteCarloConfig& mc) {
  const auto jc = joint_cov(p);
  const double lam[2] = {p.lambda1, p.lambda2};
  const auto [value, se] = cov_mc(jc, p.m, lam, mc, oracle_tag(p.m, p.l, 0xFF));
  FCovariance f;
  f.value = value(0, 1);
  f.std_error = se(0, 1);
  f.noise_variance_term = p.h.psi1() * p.omega2 / p.c;
  f.noise_covariance_term = p.h.w_prime(p.u) * p.omega2 / p.c;
  return f;
}

Eigen::MatrixXd sigma_m_oracle(int m, std::span<const double> lambdas, std::span<const double> nu, double x,
                               double omega2, double c, const WeightFunction& h, const MonteCarloConfig& mc) {
  if (nu.size() != lambdas.size()) throw ConfigError("need one scaling constant per quantile");
  using Rule = boost::math::quadrature::gauss<double, 7>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  struct Node {
    double u, w;
  };
  std::vector<Node> nodes;
  for (const auto& [a, b] : {std::pair{0.0, 0.5}, std::pair{0.5, 1.0}}) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] == 0.0) {
        nodes.push_back({mid, half * ws[i]});
      } else {
        nodes.push_back({mid - half * xs[i], half * ws[i]});
        nodes.push_back({mid + half * xs[i], half * ws[i]});
      }
    }
  }
  const auto k = static_cast<Eigen::Index>(lambdas.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
  for (int l = 1; l <= m; ++l) {
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      FCovarianceParams p{m, l, x, nodes[n].u, 0.0, 0.0, omega2, c, h};
      const auto jc = joint_cov(p);
      const auto f = cov_mc(jc, m, lambdas, mc, oracle_tag(m, l, static_cast<int>(n)));
      sum += nodes[n].w * f.first;
    }
  }
  for (Eigen::Index s = 0; s < k; ++s)
    for (Eigen::Index t = 0; t < k; ++t)
      sum(s, t) /= nu[static_cast<std::size_t>(s)] * nu[static_cast<std::size_t>(t)];
  const double psi2 = h.psi2();
  return (2.0 / (c * psi2 * psi2)) * 0.5 * (sum + sum.transpose());
}

std::vector<double> msrv_weights(int q) {
  if (q < 2) throw ConfigError("MSRV needs q >= 2");
  const double dq = q;
  const double norm = 1.0 / (1.0 - 1.0 / (dq * dq));
  std::vector<double> a(static_cast<std::size_t>(q));
  for (int j = 1; j <= q; ++j) {
    const double x = j / dq;
    a[static_cast<std::size_t>(j - 1)] = norm * ((j / (dq * dq)) * 12.0 * (x - 0.5) - (j / (2.0 * dq * dq * dq)) * 12.0);
  }
  return a;
}

double msrv(const ReturnSeries& series, int q) {
  const auto a = msrv_weights(q);
  const std::size_t n = series.size();
  if (static_cast<std::size_t>(q) > n)
    throw DataError("MSRV scale count q=" + std::to_string(q) + " exceeds N=" + std::to_string(n));
  std::vector<double> y(n + 1, 0.0);
  CompensatedSum run;
  for (std::size_t t = 0; t < n; ++t) {
    run.add(series.returns[t]);
    y[t + 1] = run.value();
  }
  CompensatedSum total;
  for (int j = 1; j <= q; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    CompensatedSum inner;
    for (std::size_t t = uj; t <= n; ++t) {
      // j = 1 uses the returns themselves.
      const double d = j == 1 ? series.returns[t - 1] : y[t] - y[t - uj];
      inner.add(d * d);
    }
    total.add(a[uj - 1] / j * inner.value());
  }
  return total.value();
}

int msrv_optimal_q(double iv_guess, double iq_guess, double omega2, std::size_t n) {
  if (!(iv_guess > 0.0) || !(iq_guess > 0.0)) throw ConfigError("MSRV bandwidth guesses must be positive");
  if (!(omega2 >= 0.0)) throw ConfigError("noise variance must be nonnegative");
  if (n < 2) throw ConfigError("MSRV needs N >= 2");
  if (omega2 == 0.0) return 2;
  const double root_n = std::sqrt(static_cast<double>(n));
  auto g = [&](double c) {
    return 2.0 * (52.0 / 35.0) * c * iq_guess + (48.0 / 5.0) * omega2 * (iv_guess + 0.5 * omega2) / c +
           48.0 * omega2 * omega2 / (c * c * c);
  };
  const double lo = 2.0 / root_n, hi = static_cast<double>(n) / root_n;
  const auto best = boost::math::tools::brent_find_minima(g, lo, hi, 50);
  const double qstar = best.first * root_n;
  int q = 2;
  double gq = g(2.0 / root_n);
  for (double cand : {std::floor(qstar), std::ceil(qstar)}) {
    const double clamped = std::clamp(cand, 2.0, static_cast<double>(n));
    const double v = g(clamped / root_n);
    if (v < gq) {
      gq = v;
      q = static_cast<int>(clamped);
    }
  }
  return q;
}

}  // namespace qrv
