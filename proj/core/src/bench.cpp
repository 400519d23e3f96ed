#include "qrv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "qrv/error.hpp"
#include "qrv/numeric.hpp"
#include "qrv/parallel.hpp"
#include "qrv/rng.hpp"

namespace qrv {

using nlohmann::json;

namespace {

constexpr std::size_t kChunk = 64;  // replications per work item

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.contains(k)) throw ConfigError(std::string(what) + " has no field '" + k + "'");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  if (n < 1) throw ConfigError("experiment needs N >= 1");
  if (replications < 1) throw ConfigError("experiment needs at least one replication");
  if (substeps < 1) throw ConfigError("substeps must be at least 1");
  if (contamination.jumps) {
    if (contamination.jumps->count < 1) throw ConfigError("jump count must be at least 1");
    if (contamination.jumps->count > n) throw ConfigError("more jumps than returns");
    if (!(contamination.jumps->variation >= 0.0)) throw ConfigError("jump variation must be nonnegative");
  }
  if (contamination.outlier && !(*contamination.outlier >= 0.0))
    throw ConfigError("outlier variation must be nonnegative");
  if (contamination.noise_gamma2 && !(*contamination.noise_gamma2 >= 0.0))
    throw ConfigError("noise ratio must be nonnegative");
  std::set<std::string> labels;
  for (const auto& e : estimators)
    if (!labels.insert(e.label).second) throw ConfigError("duplicate estimator label '" + e.label + "'");
}

ModelSpec model_from_json(const json& j) {
  if (j.is_string()) return ModelSpec::defaults(parse_model_kind(j.get<std::string>()));
  check_keys(j, {"kind", "params"}, "model");
  ModelSpec m = ModelSpec::defaults(parse_model_kind(j.at("kind").get<std::string>()));
  if (j.contains("params")) m.params = j.at("params").get<std::map<std::string, double>>();
  m.validate();
  return m;
}

json to_json(const ModelSpec& m) { return json{{"kind", to_string(m.kind)}, {"params", m.params}}; }

Contamination contamination_from_json(const json& j) {
  check_keys(j, {"jumps", "outlier", "noise_gamma2"}, "contamination");
  Contamination c;
  if (j.contains("jumps") && !j.at("jumps").is_null()) {
    const auto& jj = j.at("jumps");
    check_keys(jj, {"count", "variation"}, "jumps");
    c.jumps = JumpSpec{get_or<std::size_t>(jj, "count", 1), get_or(jj, "variation", 0.25)};
  }
  if (j.contains("outlier") && !j.at("outlier").is_null()) c.outlier = j.at("outlier").get<double>();
  if (j.contains("noise_gamma2") && !j.at("noise_gamma2").is_null())
    c.noise_gamma2 = j.at("noise_gamma2").get<double>();
  return c;
}

json to_json(const Contamination& c) {
  json j = json::object();
  if (c.jumps) j["jumps"] = {{"count", c.jumps->count}, {"variation", c.jumps->variation}};
  if (c.outlier) j["outlier"] = *c.outlier;
  if (c.noise_gamma2) j["noise_gamma2"] = *c.noise_gamma2;
  return j;
}

MonteCarloConfig mc_config_from_json(const json& j) {
  check_keys(j, {"replications", "seed", "workers", "chunk"}, "constants");
  MonteCarloConfig mc;
  mc.replications = get_or(j, "replications", mc.replications);
  mc.seed = get_or(j, "seed", mc.seed);
  mc.workers = get_or(j, "workers", mc.workers);
  mc.chunk = get_or(j, "chunk", mc.chunk);
  return mc;
}

json to_json(const MonteCarloConfig& mc) {
  return json{{"replications", mc.replications}, {"seed", mc.seed}, {"workers", mc.workers}, {"chunk", mc.chunk}};
}

ExperimentConfig experiment_from_json(const json& j) {
  try {
    check_keys(j, {"model", "contamination", "N", "replications", "estimators", "base_seed", "substeps", "workers",
                   "constants"},
               "experiment");
    ExperimentConfig c;
    c.model = model_from_json(j.at("model"));
    if (j.contains("contamination")) c.contamination = contamination_from_json(j.at("contamination"));
    c.n = get_or(j, "N", c.n);
    c.replications = get_or(j, "replications", c.replications);
    if (j.contains("estimators"))
      for (const auto& e : j.at("estimators")) c.estimators.push_back(estimator_from_json(e));
    c.base_seed = get_or(j, "base_seed", c.base_seed);
    c.substeps = get_or(j, "substeps", c.substeps);
    c.workers = get_or(j, "workers", c.workers);
    if (j.contains("constants")) c.constants = mc_config_from_json(j.at("constants"));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json est = json::array();
  for (const auto& e : c.estimators) est.push_back(to_json(e));
  return json{{"model", to_json(c.model)},     {"contamination", to_json(c.contamination)},
              {"N", c.n},                      {"replications", c.replications},
              {"estimators", est},             {"base_seed", c.base_seed},
              {"substeps", c.substeps},        {"workers", c.workers},
              {"constants", to_json(c.constants)}};
}

PathResult replication_path(const ExperimentConfig& config, std::size_t r) {
  const std::uint64_t seed = replication_seed(config.base_seed, r);
  auto path = simulate_path(config.model, config.n, seed, config.substeps);
  const auto& c = config.contamination;
  if (c.jumps) path = add_jumps(std::move(path), c.jumps->count, c.jumps->variation, seed);
  if (c.outlier) path = add_outlier(std::move(path), *c.outlier, seed);
  if (c.noise_gamma2) path = add_noise(std::move(path), *c.noise_gamma2, seed);
  return path;
}

namespace {

struct RowAcc {
  CompensatedSum ratio, ratio2, z, z2, z3, z4, e2, e4, cover;
  std::size_t count = 0, failures = 0, intervals = 0;
  std::optional<std::string> first_error;
};

struct ChunkAcc {
  std::vector<RowAcc> rows;
  CompensatedSum iv;
};

BenchRow finish(const std::string& label, const std::vector<ChunkAcc>& chunks, std::size_t j) {
  CompensatedSum ratio, ratio2, z, z2, z3, z4, e2, e4, cover;
  BenchRow row;
  row.label = label;
  std::size_t intervals = 0;
  for (const auto& c : chunks) {
    const auto& a = c.rows[j];
    ratio.add(a.ratio.value());
    ratio2.add(a.ratio2.value());
    z.add(a.z.value());
    z2.add(a.z2.value());
    z3.add(a.z3.value());
    z4.add(a.z4.value());
    e2.add(a.e2.value());
    e4.add(a.e4.value());
    cover.add(a.cover.value());
    row.count += a.count;
    row.failures += a.failures;
    intervals += a.intervals;
    if (!row.first_error && a.first_error) row.first_error = a.first_error;
  }
  if (row.count == 0) return row;
  const double n = static_cast<double>(row.count);
  row.bias = ratio.value() / n;
  const double rvar = std::max(0.0, ratio2.value() / n - row.bias * row.bias);
  row.bias_se = std::sqrt(rvar / n);
  const double mu = z.value() / n, m2 = z2.value() / n, m3 = z3.value() / n, m4 = z4.value() / n;
  const double var = std::max(0.0, m2 - mu * mu);
  row.efficiency = n > 1 ? var * n / (n - 1.0) : var;
  const double c4 = m4 - 4.0 * mu * m3 + 6.0 * mu * mu * m2 - 3.0 * mu * mu * mu * mu;
  row.efficiency_se = std::sqrt(std::max(0.0, c4 - var * var) / n);
  row.mse = e2.value() / n;
  row.mse_se = std::sqrt(std::max(0.0, e4.value() / n - row.mse * row.mse) / n);
  if (intervals > 0) {
    const double p = cover.value() / static_cast<double>(intervals);
    row.coverage = p;
    row.coverage_se = std::sqrt(p * (1.0 - p) / static_cast<double>(intervals));
  }
  return row;
}

std::vector<Estimator> prepare_all(const std::vector<Estimator>& in, ScalingTable& table,
                                   const MonteCarloConfig& mc) {
  std::vector<Estimator> out;
  for (const auto& e : in) out.push_back(prepare(e, table, mc));
  return out;
}

}  // namespace

BenchTable bias_efficiency_experiment(const ExperimentConfig& config, ScalingTable& table) {
  config.validate();
  const auto est = prepare_all(config.estimators, table, config.constants);
  const std::size_t k = est.size();
  const std::size_t chunks = (config.replications + kChunk - 1) / kChunk;
  const double root_n = std::sqrt(static_cast<double>(config.n));
  const ScalingTable& ro = table;
  auto work = [&](std::size_t c) {
    ChunkAcc acc;
    acc.rows.resize(k);
    const std::size_t end = std::min(config.replications, (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) {
      const auto path = replication_path(config, r);
      const auto series = path.returns();
      acc.iv.add(path.true_iv);
      for (std::size_t j = 0; j < k; ++j) {
        auto& a = acc.rows[j];
        try {
          const auto res = evaluate(est[j], series, ro);
          const double err = res.value - path.true_iv;
          const double ratio = res.value / path.true_iv;
          const double z = root_n * err / std::sqrt(path.true_iq);
          a.ratio.add(ratio);
          a.ratio2.add(ratio * ratio);
          a.z.add(z);
          a.z2.add(z * z);
          a.z3.add(z * z * z);
          a.z4.add(z * z * z * z);
          a.e2.add(err * err);
          a.e4.add(err * err * err * err);
          if (res.ci) {
            ++a.intervals;
            if (res.ci->lower <= path.true_iv && path.true_iv <= res.ci->upper) a.cover.add(1.0);
          }
          ++a.count;
        } catch (const std::exception& ex) {
          ++a.failures;
          if (!a.first_error) a.first_error = ex.what();
        }
      }
    }
    return acc;
  };
  const auto parts = map_chunks<ChunkAcc>(chunks, config.workers, work);
  BenchTable t;
  t.config = config;
  t.config.estimators = est;
  CompensatedSum iv;
  for (const auto& p : parts) iv.add(p.iv.value());
  t.mean_iv = iv.value() / static_cast<double>(config.replications);
  for (std::size_t j = 0; j < k; ++j) t.rows.push_back(finish(est[j].label, parts, j));
  return t;
}

BenchTable coverage_experiment(ExperimentConfig config, double level, ScalingTable& table) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  for (auto& e : config.estimators) {
    if (auto* q = std::get_if<QrvSpec>(&e.spec)) {
      q->ci = true;
      q->level = level;
    } else if (auto* s = std::get_if<QrvStarSpec>(&e.spec)) {
      s->ci = true;
      s->level = level;
    } else {
      throw ConfigError("estimator '" + e.label + "' has no feasible interval");
    }
  }
  return bias_efficiency_experiment(config, table);
}

namespace {

double propagated_se(const ThetaMatrix& t, const std::vector<double>& w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.std_error.rows(); ++i)
    for (Eigen::Index j = 0; j < t.std_error.cols(); ++j) {
      const double v = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * t.std_error(i, j);
      s += v * v;
    }
  return std::sqrt(s);
}

}  // namespace

std::vector<EfficiencyCell> efficiency_table(const std::vector<int>& ms,
                                             const std::vector<std::vector<double>>& quantile_sets,
                                             const std::vector<ThetaKind>& kinds, ScalingTable& table,
                                             const MonteCarloConfig& mc) {
  std::vector<EfficiencyCell> out;
  for (ThetaKind kind : kinds) {
    std::vector<std::optional<int>> grid;
    if (kind == ThetaKind::asymptotic)
      grid.push_back(std::nullopt);
    else
      for (int m : ms) grid.push_back(m);
    for (const auto& m : grid) {
      for (const auto& set : quantile_sets) {
        const QuantileVector qv(set);
        ThetaMatrix t;
        if (kind == ThetaKind::asymptotic) {
          t = theta_asymptotic(qv);
        } else if (auto cached = table.find_theta(kind, qv.variant(), m, qv.values())) {
          t = *cached;
        } else {
          t = kind == ThetaKind::blocked ? theta_blocked(*m, qv, mc) : theta_subsampled(*m, qv, mc);
          table.put_theta(t);
        }
        EfficiencyCell base{kind, m, set, "", {}, 0.0, 0.0};
        if (set.size() == 1) {
          auto c = base;
          c.weighting = "single";
          c.weights = {1.0};
          c.theta = t.values(0, 0);
          c.std_error = t.std_error(0, 0);
          out.push_back(c);
          continue;
        }
        const auto opt = optimal_weights(t.values);
        auto c = base;
        c.weighting = "optimal";
        c.weights = opt.weights;
        c.theta = opt.theta;
        c.std_error = propagated_se(t, opt.weights);
        out.push_back(c);
        if (kind != ThetaKind::asymptotic) {
          const auto aw = optimal_weights(theta_asymptotic(qv).values).weights;
          auto a = base;
          a.weighting = "asymptotic";
          a.weights = aw;
          a.theta = achieved_theta(t.values, aw);
          a.std_error = propagated_se(t, aw);
          out.push_back(a);
        }
      }
    }
  }
  return out;
}

namespace {

struct CurveAcc {
  std::vector<CompensatedSum> e2, ratio;
  std::vector<std::size_t> count, failures;
  CompensatedSum msrv_e2;
  std::size_t msrv_count = 0;
};

}  // namespace

MseCurve mse_curve_K(const ExperimentConfig& config, const QrvStarSpec& star, const std::vector<int>& K_values,
                     ScalingTable& table) {
  config.validate();
  if (K_values.empty()) throw ConfigError("mse curve needs at least one K");
  MseCurve curve;
  std::vector<Estimator> est;
  std::vector<std::size_t> slot;  // point index of each prepared estimator
  for (int K : K_values) {
    MsePoint p;
    p.K = K;
    const std::size_t need = static_cast<std::size_t>(star.m) * static_cast<std::size_t>(std::max(K - 1, 0));
    if (K < 2 || config.n < need || config.n < static_cast<std::size_t>(K)) {
      p.feasible = false;
      curve.skipped.push_back("K=" + std::to_string(K) + ": needs K >= 2 and N >= max(K, m(K-1))");
    } else {
      QrvStarSpec s = star;
      s.K = K;
      s.c.reset();
      s.ci = false;
      est.push_back(prepare(Estimator{"qrv_star_K" + std::to_string(K), s}, table, config.constants));
      slot.push_back(curve.points.size());
    }
    curve.points.push_back(p);
  }
  const std::size_t k = est.size();
  const std::size_t chunks = (config.replications + kChunk - 1) / kChunk;
  const ScalingTable& ro = table;
  auto work = [&](std::size_t c) {
    CurveAcc acc;
    acc.e2.resize(k);
    acc.ratio.resize(k);
    acc.count.assign(k, 0);
    acc.failures.assign(k, 0);
    const std::size_t end = std::min(config.replications, (c + 1) * kChunk);
    for (std::size_t r = c * kChunk; r < end; ++r) {
      const auto path = replication_path(config, r);
      const auto series = path.returns();
      for (std::size_t j = 0; j < k; ++j) {
        try {
          const double v = evaluate(est[j], series, ro).value;
          const double e = v - path.true_iv;
          acc.e2[j].add(e * e);
          acc.ratio[j].add(v / path.true_iv);
          ++acc.count[j];
        } catch (const std::exception&) {
          ++acc.failures[j];
        }
      }
      const int q = msrv_optimal_q(path.true_iv, path.true_iq, path.noise_omega2.value_or(0.0), config.n);
      const double e = msrv(series, q) - path.true_iv;
      acc.msrv_e2.add(e * e);
      ++acc.msrv_count;
    }
    return acc;
  };
  const auto parts = map_chunks<CurveAcc>(chunks, config.workers, work);
  CompensatedSum msrv_e2;
  std::size_t msrv_n = 0;
  for (const auto& p : parts) {
    msrv_e2.add(p.msrv_e2.value());
    msrv_n += p.msrv_count;
  }
  curve.msrv_mse = msrv_e2.value() / static_cast<double>(msrv_n);
  curve.msrv_log_mse = std::log(curve.msrv_mse);
  for (std::size_t j = 0; j < k; ++j) {
    CompensatedSum e2, ratio;
    std::size_t n = 0, fails = 0;
    for (const auto& p : parts) {
      e2.add(p.e2[j].value());
      ratio.add(p.ratio[j].value());
      n += p.count[j];
      fails += p.failures[j];
    }
    auto& pt = curve.points[slot[j]];
    pt.failures = fails;
    if (n == 0) {
      pt.feasible = false;
      continue;
    }
    pt.mse = e2.value() / static_cast<double>(n);
    pt.log_mse = std::log(pt.mse);
    pt.bias = ratio.value() / static_cast<double>(n);
  }
  const MsePoint* best = nullptr;
  for (const auto& p : curve.points)
    if (p.feasible && (!best || p.mse < best->mse)) best = &p;
  if (best) curve.argmin_K = best->K;
  return curve;
}

void write_csv(std::ostream& os, const BenchTable& t) {
  os << "label,count,failures,bias,bias_se,efficiency,efficiency_se,mse,mse_se,coverage,coverage_se\n";
  for (const auto& r : t.rows) {
    os << r.label << ',' << r.count << ',' << r.failures << ',' << num(r.bias) << ',' << num(r.bias_se) << ','
       << num(r.efficiency) << ',' << num(r.efficiency_se) << ',' << num(r.mse) << ',' << num(r.mse_se) << ','
       << (r.coverage ? num(*r.coverage) : "") << ',' << (r.coverage_se ? num(*r.coverage_se) : "") << '\n';
  }
}

json to_json(const BenchTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json j{{"label", r.label},
           {"count", r.count},
           {"failures", r.failures},
           {"bias", r.bias},
           {"bias_se", r.bias_se},
           {"efficiency", r.efficiency},
           {"efficiency_se", r.efficiency_se},
           {"mse", r.mse},
           {"mse_se", r.mse_se}};
    j["coverage"] = r.coverage ? json(*r.coverage) : json(nullptr);
    j["coverage_se"] = r.coverage_se ? json(*r.coverage_se) : json(nullptr);
    if (r.first_error) j["first_error"] = *r.first_error;
    rows.push_back(j);
  }
  return json{{"config", to_json(t.config)}, {"mean_iv", t.mean_iv}, {"rows", rows}};
}

void write_csv(std::ostream& os, const std::vector<EfficiencyCell>& cells) {
  os << "kind,m,lambdas,weighting,weights,theta,std_error\n";
  for (const auto& c : cells) {
    std::string l, w;
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) l += (i ? ";" : "") + num(c.lambdas[i]);
    for (std::size_t i = 0; i < c.weights.size(); ++i) w += (i ? ";" : "") + num(c.weights[i]);
    os << to_string(c.kind) << ',' << (c.m ? std::to_string(*c.m) : "inf") << ',' << l << ',' << c.weighting << ','
       << w << ',' << num(c.theta) << ',' << num(c.std_error) << '\n';
  }
}

json to_json(const std::vector<EfficiencyCell>& cells) {
  json out = json::array();
  for (const auto& c : cells)
    out.push_back(json{{"kind", to_string(c.kind)},
                       {"m", c.m ? json(*c.m) : json(nullptr)},
                       {"lambdas", c.lambdas},
                       {"weighting", c.weighting},
                       {"weights", c.weights},
                       {"theta", c.theta},
                       {"std_error", c.std_error}});
  return out;
}

void write_csv(std::ostream& os, const MseCurve& c) {
  os << "K,log_mse,mse,bias,feasible\n";
  for (const auto& p : c.points)
    os << p.K << ',' << (p.feasible ? num(p.log_mse) : "") << ',' << (p.feasible ? num(p.mse) : "") << ','
       << (p.feasible ? num(p.bias) : "") << ',' << (p.feasible ? 1 : 0) << '\n';
  os << "msrv," << num(c.msrv_log_mse) << ',' << num(c.msrv_mse) << ",,1\n";
}

json to_json(const MseCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back(json{{"K", p.K},
                       {"feasible", p.feasible},
                       {"log_mse", p.feasible ? json(p.log_mse) : json(nullptr)},
                       {"mse", p.feasible ? json(p.mse) : json(nullptr)},
                       {"bias", p.feasible ? json(p.bias) : json(nullptr)},
                       {"failures", p.failures}});
  return json{{"points", pts},
              {"msrv_mse", c.msrv_mse},
              {"msrv_log_mse", c.msrv_log_mse},
              {"argmin_K", c.argmin_K ? json(*c.argmin_K) : json(nullptr)},
              {"skipped", c.skipped}};
}

}  // namespace qrv
