#include "qrv/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/tools/roots.hpp>

#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "qrv/rng.hpp"

namespace qrv {

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::bm: return "BM";
    case ModelKind::sv: return "SV";
    case ModelKind::sv_lev: return "SV-LEV";
    case ModelKind::sev_nd: return "SEV-ND";
    case ModelKind::sv2f_lev: return "SV2F-LEV";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  std::string u;
  for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::replace(u.begin(), u.end(), '_', '-');
  for (auto k : {ModelKind::bm, ModelKind::sv, ModelKind::sv_lev, ModelKind::sev_nd, ModelKind::sv2f_lev})
    if (u == to_string(k)) return k;
  throw ConfigError("unknown model '" + s + "'");
}

namespace {

std::map<std::string, double> base_params(ModelKind kind) {
  switch (kind) {
    case ModelKind::bm: return {{"sigma2", 0.0391}};
    case ModelKind::sv:
    case ModelKind::sv_lev:
      return {{"kappa_theta", 0.3141},
              {"kappa", 8.0369},
              {"xi2", 0.1827},
              {"rho", kind == ModelKind::sv ? 0.0 : -0.75},
              {"v0", std::nan("")}};
    case ModelKind::sev_nd:
      return {{"a0", -0.554}, {"a1", 21.32}, {"a2", -209.3}, {"a3", 0.005}, {"b1", 0.017},
              {"b2", 53.97},  {"p", 5.76},   {"v0", std::nan("")},           {"floor", 1e-8}};
    case ModelKind::sv2f_lev:
      return {{"b0", -1.2},   {"b1", 0.04},  {"b2", 1.5},   {"k1", 0.000137}, {"k2", 1.386}, {"beta", 0.25},
              {"rho1", -0.3}, {"rho2", -0.3}, {"f1_0", 0.0}, {"f2_0", 0.0},    {"splice", std::log(1.5)}};
  }
  return {};
}

double sev_drift(const ModelSpec& s, double v) {
  return s.param("a0") + s.param("a1") * v + s.param("a2") * v * v + s.param("a3") / v;
}

// Stable zero of the SEV-ND drift: the largest sign change from + to -.
double sev_stationary(const ModelSpec& s) {
  double prev = 1e-6;
  double fprev = sev_drift(s, prev);
  double lo = -1.0, hi = -1.0;
  for (int i = 1; i <= 4000; ++i) {
    const double v = 1e-6 + i * 2.5e-4;
    const double f = sev_drift(s, v);
    if (fprev > 0.0 && f <= 0.0) {
      lo = prev;
      hi = v;
    }
    prev = v;
    fprev = f;
  }
  if (lo < 0.0) throw ConfigError("SEV-ND drift has no stable zero in (0, 1]; set v0 explicitly");
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve([&](double v) { return sev_drift(s, v); }, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

ModelSpec ModelSpec::defaults(ModelKind kind) { return ModelSpec{kind, {}}; }

double ModelSpec::param(const std::string& name) const {
  if (auto it = params.find(name); it != params.end()) return it->second;
  const auto base = base_params(kind);
  const auto it = base.find(name);
  if (it == base.end()) throw ConfigError("model " + to_string(kind) + " has no parameter '" + name + "'");
  if (name == "v0" && std::isnan(it->second)) {
    if (kind == ModelKind::sev_nd) return sev_stationary(*this);
    return param("kappa_theta") / param("kappa");
  }
  return it->second;
}

void ModelSpec::validate() const {
  const auto base = base_params(kind);
  for (const auto& [name, value] : params) {
    if (!base.contains(name)) throw ConfigError("model " + to_string(kind) + " has no parameter '" + name + "'");
    if (!std::isfinite(value)) throw ConfigError("model parameter '" + name + "' must be finite");
  }
  auto nonneg = [&](const char* n) {
    if (param(n) < 0.0) throw ConfigError(std::string("model parameter '") + n + "' must be nonnegative");
  };
  auto corr = [&](const char* n) {
    if (std::abs(param(n)) > 1.0) throw ConfigError(std::string("correlation '") + n + "' must lie in [-1, 1]");
  };
  switch (kind) {
    case ModelKind::bm: nonneg("sigma2"); break;
    case ModelKind::sv:
    case ModelKind::sv_lev:
      nonneg("xi2");
      nonneg("v0");
      corr("rho");
      break;
    case ModelKind::sev_nd:
      nonneg("b1");
      nonneg("b2");
      if (!(param("floor") > 0.0)) throw ConfigError("SEV-ND variance floor must be positive");
      if (!(param("v0") > 0.0)) throw ConfigError("SEV-ND initial variance must be positive");
      break;
    case ModelKind::sv2f_lev:
      corr("rho1");
      corr("rho2");
      if (!(param("splice") > 0.0)) throw ConfigError("splice point must be positive");
      break;
  }
}

double spliced_exp(double u, double u0) {
  if (u <= u0) return std::exp(u);
  return std::exp(u0) * std::sqrt(1.0 - u0 + u * u / u0);
}

ReturnSeries PathResult::returns() const {
  if (log_prices.size() < 2) throw DataError("path has no returns");
  std::vector<double> r(log_prices.size() - 1);
  for (std::size_t i = 0; i + 1 < log_prices.size(); ++i) r[i] = log_prices[i + 1] - log_prices[i];
  return ReturnSeries(std::move(r));
}

PathResult simulate_path(const ModelSpec& model, std::size_t n, std::uint64_t seed, int substeps) {
  if (n < 1) throw ConfigError("path needs N >= 1");
  if (substeps < 1) throw ConfigError("substeps must be at least 1");
  model.validate();
  PathResult out;
  out.model = to_string(model.kind);
  out.seed = seed;
  out.substeps = substeps;
  out.log_prices.assign(n + 1, 0.0);
  NormalSource z(seed, Stream::path);

  if (model.kind == ModelKind::bm) {
    const double s2 = model.param("sigma2");
    const double sd = std::sqrt(s2 / static_cast<double>(n));
    // Constant variance: substeps aggregate exactly, so draw one normal per return.
    for (std::size_t i = 1; i <= n; ++i) out.log_prices[i] = out.log_prices[i - 1] + sd * z();
    out.true_iv = s2;
    out.true_iq = s2 * s2;
    return out;
  }

  const std::size_t steps = n * static_cast<std::size_t>(substeps);
  const double dt = 1.0 / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);
  CompensatedSum iv, iq, x;

  // Each fine step: variance v (state), effective v+ drives the price.
  auto run = [&](auto&& step) {
    for (std::size_t i = 1; i <= n; ++i) {
      for (int s = 0; s < substeps; ++s) {
        const double dw = sdt * z();
        const double vp = step(dw);
        x.add(std::sqrt(vp) * dw);
        iv.add(vp * dt);
        iq.add(vp * vp * dt);
      }
      out.log_prices[i] = x.value();
    }
  };

  switch (model.kind) {
    case ModelKind::sv:
    case ModelKind::sv_lev: {
      const double a = model.param("kappa_theta"), k = model.param("kappa"), xi = std::sqrt(model.param("xi2"));
      const double rho = model.param("rho"), rc = std::sqrt(1.0 - rho * rho);
      double v = model.param("v0");
      run([&](double dw) {
        const double vp = std::max(v, 0.0);
        const double db = rho * dw + rc * sdt * z();
        v += (a - k * vp) * dt + xi * std::sqrt(vp) * db;
        if (v < 0.0) ++out.truncations;
        return vp;
      });
      break;
    }
    case ModelKind::sev_nd: {
      const double a0 = model.param("a0"), a1 = model.param("a1"), a2 = model.param("a2"), a3 = model.param("a3");
      const double b1 = model.param("b1"), b2 = model.param("b2"), half_p = 0.5 * model.param("p");
      const double floor = model.param("floor");
      double v = model.param("v0");
      run([&](double) {
        const double vp = v;
        const double db = sdt * z();
        v += (a0 + a1 * vp + a2 * vp * vp + a3 / vp) * dt + std::sqrt(b1 * vp + b2 * std::pow(vp, half_p)) * db;
        if (!(v >= floor)) {
          v = floor;
          ++out.truncations;
        }
        return vp;
      });
      break;
    }
    case ModelKind::sv2f_lev: {
      const double b0 = model.param("b0"), b1 = model.param("b1"), b2 = model.param("b2");
      const double k1 = model.param("k1"), k2 = model.param("k2"), beta = model.param("beta");
      const double r1 = model.param("rho1"), r2 = model.param("rho2");
      const double c1 = std::sqrt(1.0 - r1 * r1), c2 = std::sqrt(1.0 - r2 * r2);
      const double u0 = model.param("splice");
      double f1 = model.param("f1_0"), f2 = model.param("f2_0");
      run([&](double dw) {
        const double vp = spliced_exp(b0 + b1 * f1 + b2 * f2, u0);
        const double db1 = r1 * dw + c1 * sdt * z();
        const double db2 = r2 * dw + c2 * sdt * z();
        f1 += -k1 * f1 * dt + db1;
        f2 += -k2 * f2 * dt + (1.0 + beta * f2) * db2;
        return vp;
      });
      break;
    }
    case ModelKind::bm: break;
  }
  out.true_iv = iv.value();
  out.true_iq = iq.value();
  return out;
}

PathResult add_jumps(PathResult path, std::size_t n_j, double v_j, std::uint64_t seed) {
  const std::size_t n = path.n();
  if (n_j < 1) throw ConfigError("jump count must be at least 1");
  if (!(v_j >= 0.0) || !std::isfinite(v_j)) throw ConfigError("jump variation share must be nonnegative");
  if (n_j > n) throw DataError("cannot place " + std::to_string(n_j) + " jumps in " + std::to_string(n) + " returns");
  Philox pos(seed, Stream::jumps, 0);
  NormalSource size(seed, Stream::jumps, 1);
  // Floyd's sampling of n_j distinct indices from 1..n.
  std::set<std::size_t> chosen;
  std::vector<std::size_t> order;
  for (std::size_t j = n - n_j + 1; j <= n; ++j) {
    const std::size_t t = 1 + pos.below(j);
    const std::size_t pick = chosen.contains(t) ? j : t;
    chosen.insert(pick);
    order.push_back(pick);
  }
  std::vector<double> sizes(n_j);
  size.fill(sizes);
  double ss = 0.0;
  for (double s : sizes) ss += s * s;
  const double scale = std::sqrt(v_j * path.true_iv / ss);
  std::vector<std::size_t> idx(n_j);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });
  for (std::size_t i : idx) {
    const double jump = scale * sizes[i];
    for (std::size_t p = order[i]; p <= n; ++p) path.log_prices[p] += jump;
    path.jump_times.push_back(order[i]);
    path.jump_sizes.push_back(jump);
  }
  return path;
}

PathResult add_outlier(PathResult path, double v_o, std::uint64_t seed) {
  const std::size_t n = path.n();
  if (!(v_o >= 0.0) || !std::isfinite(v_o)) throw ConfigError("outlier variation share must be nonnegative");
  if (n < 3) throw DataError("an outlier needs N >= 3");
  Philox eng(seed, Stream::outlier, 0);
  const std::size_t at = 1 + eng.below(n - 1);  // interior price 1..N-1
  const double sign = (eng() >> 63) ? 1.0 : -1.0;
  const double o = sign * std::sqrt(0.5 * v_o * path.true_iv);
  path.log_prices[at] += o;
  path.outlier_index = at;
  path.outlier_size = o;
  return path;
}

PathResult add_noise(PathResult path, double gamma2, std::uint64_t seed) {
  if (!(gamma2 >= 0.0) || !std::isfinite(gamma2)) throw ConfigError("noise ratio gamma^2 must be nonnegative");
  const std::size_t n = path.n();
  if (n < 1) throw DataError("path has no returns");
  const double omega2 = gamma2 * path.true_iv / static_cast<double>(n);
  path.noise_omega2 = omega2;
  if (omega2 == 0.0) return path;
  const double sd = std::sqrt(omega2);
  NormalSource z(seed, Stream::noise);
  for (double& x : path.log_prices) x += sd * z();
  return path;
}

}  // namespace qrv
