#include "qrv/theta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mc_reduce.hpp"
#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "qrv/parallel.hpp"
#include "qrv/rng.hpp"
#include "qrv/warn.hpp"

namespace qrv {

std::string to_string(ThetaKind k) {
  switch (k) {
    case ThetaKind::blocked: return "blocked";
    case ThetaKind::subsampled: return "subsampled";
    case ThetaKind::asymptotic: return "asymptotic";
  }
  return "unknown";
}

ThetaKind parse_theta_kind(const std::string& s) {
  if (s == "blocked") return ThetaKind::blocked;
  if (s == "subsampled") return ThetaKind::subsampled;
  if (s == "asymptotic") return ThetaKind::asymptotic;
  throw ConfigError("unknown theta kind '" + s + "'");
}

namespace {

struct Ranks {
  int lo;
  int hi;
};

std::vector<Ranks> ranks_for(int m, const QuantileVector& lambdas) {
  std::vector<Ranks> out;
  for (double l : lambdas.values()) {
    const int hi = quantile_rank(m, l, lambdas.variant());
    out.push_back({lambdas.variant() == Variant::signed_symmetric ? m - hi + 1 : hi, hi});
  }
  return out;
}

Eigen::MatrixXd spread_stderr(const std::vector<Eigen::MatrixXd>& per_chunk, Eigen::Index k) {
  Eigen::MatrixXd se = Eigen::MatrixXd::Zero(k, k);
  const auto n = static_cast<double>(per_chunk.size());
  if (per_chunk.size() < 2) return se;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      CompensatedSum s, ss;
      for (const auto& t : per_chunk) {
        s.add(t(i, j));
        ss.add(t(i, j) * t(i, j));
      }
      const double mean = s.value() / n;
      const double var = std::max(0.0, (ss.value() - n * mean * mean) / (n - 1.0));
      se(i, j) = std::sqrt(var / n);
    }
  return se;
}

}  // namespace

ThetaMatrix theta_blocked(int m, const QuantileVector& lambdas, const MonteCarloConfig& mc) {
  const auto k = static_cast<Eigen::Index>(lambdas.size());
  std::vector<MomentKey> keys;
  for (double l : lambdas.values()) keys.push_back(scaling_key(m, l, lambdas.variant()));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      MomentKey c = scaling_key(m, lambdas[i], lambdas.variant());
      c.lambda2 = lambdas[j];
      keys.push_back(c);
    }
  for (const auto& key : keys) key.validate();
  if (mc.replications < 100'000) throw ConfigError("theta constants need at least 1e5 replications");

  const auto chunks = detail::moment_chunks(keys, mc);

  auto assemble = [&](auto mean_of) {
    Eigen::MatrixXd t(k, k);
    std::size_t slot = static_cast<std::size_t>(k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i; j < k; ++j, ++slot) {
        const double ni = mean_of(static_cast<std::size_t>(i));
        const double nj = mean_of(static_cast<std::size_t>(j));
        t(i, j) = t(j, i) = m * (mean_of(slot) - ni * nj) / (ni * nj);
      }
    return t;
  };

  ThetaMatrix out;
  out.values = assemble([&](std::size_t s) { return detail::reduce_mean(chunks, s).first; });
  std::vector<Eigen::MatrixXd> per_chunk;
  for (const auto& c : chunks)
    per_chunk.push_back(assemble([&](std::size_t s) {
      return c.sum[s].value() / static_cast<double>(c.count);
    }));
  out.std_error = spread_stderr(per_chunk, k);
  out.kind = ThetaKind::blocked;
  out.m = m;
  out.variant = lambdas.variant();
  out.lambdas.assign(lambdas.values().begin(), lambdas.values().end());
  out.replications = mc.replications;
  out.seed = mc.seed;
  return out;
}

namespace {

// Sufficient statistics of one long sequence for the long-run covariance.
struct LongRunSums {
  double n_all = 0;                // windows
  double n_lag = 0;                // windows with m successors in range
  std::vector<double> s1;          // sum y_a over all windows
  Eigen::MatrixXd s2;              // sum y_a y_b over all windows
  std::vector<double> t1;          // sum y_a over lag windows
  std::vector<double> v1;          // sum W_b over lag windows
  Eigen::MatrixXd p;               // sum y_a W_b over lag windows
};

Eigen::MatrixXd long_run_theta(const std::vector<const LongRunSums*>& parts, int m,
                               std::span<const double> shift) {
  const auto k = static_cast<Eigen::Index>(shift.size());
  double n_all = 0, n_lag = 0;
  std::vector<CompensatedSum> s1(k), t1(k), v1(k);
  std::vector<CompensatedSum> s2(k * k), p(k * k);
  for (const auto* c : parts) {
    n_all += c->n_all;
    n_lag += c->n_lag;
    for (Eigen::Index a = 0; a < k; ++a) {
      s1[a].add(c->s1[a]);
      t1[a].add(c->t1[a]);
      v1[a].add(c->v1[a]);
      for (Eigen::Index b = 0; b < k; ++b) {
        s2[a * k + b].add(c->s2(a, b));
        p[a * k + b].add(c->p(a, b));
      }
    }
  }
  std::vector<double> mu(k);
  for (Eigen::Index a = 0; a < k; ++a) mu[a] = s1[a].value() / n_all;
  Eigen::MatrixXd cross(k, k), lag0(k, k), theta(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      cross(a, b) = (p[a * k + b].value() - mu[a] * v1[b].value() - m * mu[b] * t1[a].value() +
                     n_lag * m * mu[a] * mu[b]) /
                    n_lag;
      lag0(a, b) = s2[a * k + b].value() / n_all - mu[a] * mu[b];
    }
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      const double lrv = cross(a, b) + cross(b, a) - lag0(a, b);
      theta(a, b) = lrv / ((shift[a] + mu[a]) * (shift[b] + mu[b]));
    }
  return 0.5 * (theta + theta.transpose());
}

}  // namespace

ThetaMatrix theta_subsampled(int m, const QuantileVector& lambdas, const MonteCarloConfig& mc) {
  const auto ranks = ranks_for(m, lambdas);
  const auto k = static_cast<Eigen::Index>(lambdas.size());
  if (mc.replications < 100'000) throw ConfigError("theta constants need at least 1e5 windows");
  const std::uint64_t per_chunk = std::max<std::uint64_t>(mc.chunk, 16ull * m);
  const std::uint64_t n_chunks = (mc.replications + per_chunk - 1) / per_chunk;
  const bool absolute = lambdas.variant() == Variant::absolute;

  std::vector<double> shift(k);
  for (Eigen::Index a = 0; a < k; ++a) shift[a] = nu_asymptotic(lambdas[a], lambdas.variant());

  const std::uint64_t seed = replication_seed(mc.seed, (0x5ull << 40) ^ static_cast<std::uint64_t>(m));
  auto chunks = map_chunks<LongRunSums>(n_chunks, mc.workers, [&](std::size_t c) {
    const std::uint64_t windows =
        std::min(per_chunk, mc.replications - c * per_chunk);
    const std::size_t w = std::max<std::uint64_t>(windows, 2ull * m);
    NormalSource normals(seed, Stream::constants, c);
    std::vector<double> x(w + m - 1);
    normals.fill(x);
    if (absolute)
      for (double& v : x) v = std::abs(v);

    // y[a * w + i]: shifted quantile statistic of window i.
    std::vector<double> y(static_cast<std::size_t>(k) * w);
    std::vector<double> win(x.begin(), x.begin() + m);
    std::sort(win.begin(), win.end());
    for (std::size_t i = 0;; ++i) {
      for (Eigen::Index a = 0; a < k; ++a) {
        const double lo = win[ranks[a].lo - 1];
        const double hi = win[ranks[a].hi - 1];
        y[a * w + i] = (absolute ? hi * hi : lo * lo + hi * hi) - shift[a];
      }
      if (i + 1 == w) break;
      win.erase(std::lower_bound(win.begin(), win.end(), x[i]));
      const double in = x[i + m];
      win.insert(std::upper_bound(win.begin(), win.end(), in), in);
    }

    LongRunSums s;
    s.n_all = static_cast<double>(w);
    const std::size_t n_lag = w - m + 1;
    s.n_lag = static_cast<double>(n_lag);
    s.s1.assign(k, 0.0);
    s.t1.assign(k, 0.0);
    s.v1.assign(k, 0.0);
    s.s2 = Eigen::MatrixXd::Zero(k, k);
    s.p = Eigen::MatrixXd::Zero(k, k);

    // Window sums W_b(i) = sum_{d<m} y_b(i + d) from prefix sums.
    std::vector<double> wsum(static_cast<std::size_t>(k) * n_lag);
    for (Eigen::Index b = 0; b < k; ++b) {
      const double* yb = &y[b * w];
      double run = 0.0;
      for (int d = 0; d < m; ++d) run += yb[d];
      for (std::size_t i = 0; i < n_lag; ++i) {
        wsum[b * n_lag + i] = run;
        if (i + m < w) run += yb[i + m] - yb[i];
      }
    }
    for (Eigen::Index a = 0; a < k; ++a) {
      const double* ya = &y[a * w];
      CompensatedSum s1, t1, v1;
      for (std::size_t i = 0; i < w; ++i) s1.add(ya[i]);
      for (std::size_t i = 0; i < n_lag; ++i) {
        t1.add(ya[i]);
        v1.add(wsum[a * n_lag + i]);
      }
      s.s1[a] = s1.value();
      s.t1[a] = t1.value();
      s.v1[a] = v1.value();
      for (Eigen::Index b = 0; b < k; ++b) {
        const double* yb = &y[b * w];
        const double* wb = &wsum[b * n_lag];
        CompensatedSum s2, p;
        for (std::size_t i = 0; i < w; ++i) s2.add(ya[i] * yb[i]);
        for (std::size_t i = 0; i < n_lag; ++i) p.add(ya[i] * wb[i]);
        s.s2(a, b) = s2.value();
        s.p(a, b) = p.value();
      }
    }
    return s;
  });

  std::vector<const LongRunSums*> all;
  for (const auto& c : chunks) all.push_back(&c);
  ThetaMatrix out;
  out.values = long_run_theta(all, m, shift);
  std::vector<Eigen::MatrixXd> per;
  for (const auto& c : chunks) per.push_back(long_run_theta({&c}, m, shift));
  out.std_error = spread_stderr(per, k);
  out.kind = ThetaKind::subsampled;
  out.m = m;
  out.variant = lambdas.variant();
  out.lambdas.assign(lambdas.values().begin(), lambdas.values().end());
  out.replications = mc.replications;
  out.seed = mc.seed;
  return out;
}

ThetaMatrix theta_asymptotic(const QuantileVector& lambdas) {
  const auto k = static_cast<Eigen::Index>(lambdas.size());
  const bool absolute = lambdas.variant() == Variant::absolute;
  std::vector<double> q(k), dens(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (absolute) {
      if (!(lambdas[i] > 0.0)) throw ConfigError("asymptotic absolute constants need lambda > 0");
      q[i] = chi2_1_quantile(lambdas[i]);
      dens[i] = chi2_1_pdf(q[i]);
    } else {
      q[i] = normal_quantile(lambdas[i]);
      dens[i] = normal_pdf(q[i]);
    }
  }
  ThetaMatrix out;
  out.values.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Eigen::Index s = std::min(i, j);  // smaller lambda
      const Eigen::Index l = std::max(i, j);
      const double denom = dens[i] * dens[j] * q[i] * q[j];
      out.values(i, j) = absolute ? lambdas[s] * (1.0 - lambdas[l]) / denom
                                  : 2.0 * (1.0 - lambdas[l]) * (2.0 * lambdas[s] - 1.0) / denom;
    }
  out.std_error = Eigen::MatrixXd::Zero(k, k);
  out.kind = ThetaKind::asymptotic;
  out.variant = lambdas.variant();
  out.lambdas.assign(lambdas.values().begin(), lambdas.values().end());
  return out;
}

OptimalWeights optimal_weights(const Eigen::MatrixXd& theta, double max_condition) {
  if (theta.rows() == 0 || theta.rows() != theta.cols())
    throw ConfigError("theta must be a non-empty square matrix");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                              : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream os;
    os << "theta is ill-conditioned: condition number " << cond << " exceeds cap " << max_condition;
    throw NumericalError(os.str());
  }
  const Eigen::VectorXd iota = Eigen::VectorXd::Ones(theta.rows());
  const Eigen::VectorXd x = theta.colPivHouseholderQr().solve(iota);
  const double denom = iota.dot(x);
  if (!(denom > 0.0)) throw NumericalError("theta is not positive definite: iota' inv(theta) iota <= 0");
  OptimalWeights w;
  w.theta = 1.0 / denom;
  w.condition_number = cond;
  w.weights.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) w.weights[i] = x(i) / denom;
  const double total = compensated_sum(w.weights);
  for (double& v : w.weights) v /= total;
  w.has_negative = std::any_of(w.weights.begin(), w.weights.end(), [](double v) { return v < 0.0; });
  if (w.has_negative) warn("optimal quantile weights contain negative entries");
  return w;
}

double achieved_theta(const Eigen::MatrixXd& theta, std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != theta.rows())
    throw ConfigError("weight count does not match theta dimension");
  const Eigen::Map<const Eigen::VectorXd> a(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return a.dot(theta * a);
}

void check_theta(const Eigen::MatrixXd& theta) {
  if (theta.rows() != theta.cols()) throw NumericalError("theta must be square");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw NumericalError("theta is not symmetric within 1e-12");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (theta + theta.transpose()));
  if (es.eigenvalues().minCoeff() < -1e-9) throw NumericalError("theta is not positive semi-definite");
}

}  // namespace qrv
