// Acceptance run: one PASS/FAIL line per criterion. Budgets are sized for a
// single core; every tolerance is fixed below.
//
// usage: qrv_acceptance [--cli <path to qrv>] [AC1 AC2 ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrv/bench.hpp"
#include "qrv/io.hpp"
#include "qrv/run.hpp"
#include "qrv/theta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Constants budget shared by every experiment below.
constexpr std::uint64_t kConstantReps = 1'000'000;
const std::vector<double> kFour{0.80, 0.85, 0.90, 0.95};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records one sub-check; the criterion passes only if all do.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
  }
  // Reported only.
  void note(const std::string& what) { detail << (detail.tellp() > 0 ? "; " : "") << what << " [info]"; }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string within(const std::string& name, double v, double target, double tol) {
  return name + "=" + fmt("%.4f", v) + " (target " + fmt("%.4f", target) + " +- " + fmt("%.4f", tol) + ")";
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

qrv::MonteCarloConfig constants_mc() {
  qrv::MonteCarloConfig mc;
  mc.replications = kConstantReps;
  return mc;
}

json qrv_json(const std::string& label, int m, const std::string& mode = "blocked") {
  return {{"type", "qrv"}, {"label", label}, {"lambdas", kFour}, {"m", m}, {"mode", mode}, {"weights", "asymptotic"}};
}

json star_json(const std::string& label, double c, int m = 40) {
  return {{"type", "qrv_star"}, {"label", label}, {"lambdas", kFour}, {"m", m}, {"c", c}, {"weights", "asymptotic"}};
}

qrv::ExperimentConfig experiment(const json& model_and_contamination, std::size_t n, std::size_t reps,
                                 const json& estimators, std::uint64_t seed) {
  json j = model_and_contamination;
  j["N"] = n;
  j["replications"] = reps;
  j["estimators"] = estimators;
  j["base_seed"] = seed;
  j["constants"] = {{"replications", kConstantReps}};
  return qrv::experiment_from_json(j);
}

const qrv::BenchRow& row(const qrv::BenchTable& t, const std::string& label) {
  for (const auto& r : t.rows)
    if (r.label == label) return r;
  throw std::runtime_error("no row " + label);
}

qrv::ScalingTable& shared_table() {
  static qrv::ScalingTable t;
  return t;
}

// Table 1 constants.
Outcome ac1() {
  Outcome o;
  const auto mc = constants_mc();
  auto mc2 = mc;
  mc2.replications = 2'000'000;
  const auto tb = qrv::theta_blocked(20, qrv::QuantileVector({0.90}), mc2);
  o.check(near(tb.values(0, 0), 3.10, 0.05), within("blocked(20,.90)", tb.values(0, 0), 3.10, 0.05));
  const auto ts = qrv::theta_subsampled(20, qrv::QuantileVector({0.90}), mc2);
  o.check(near(ts.values(0, 0), 2.67, 0.05), within("subsampled(20,.90)", ts.values(0, 0), 2.67, 0.05));
  const double a90 = qrv::theta_asymptotic(qrv::QuantileVector({0.90})).values(0, 0);
  const double a95 = qrv::theta_asymptotic(qrv::QuantileVector({0.95})).values(0, 0);
  o.check(near(a90, 3.16, 0.005), within("asymptotic(.90)", a90, 3.16, 0.005));
  o.check(near(a95, 3.13, 0.005), within("asymptotic(.95)", a95, 3.13, 0.005));
  const auto w = qrv::optimal_weights(qrv::theta_asymptotic(qrv::QuantileVector(kFour)).values);
  const auto t4 = qrv::theta_blocked(20, qrv::QuantileVector(kFour), mc2);
  const double th = qrv::achieved_theta(t4.values, w.weights);
  o.check(near(th, 2.41, 0.03), within("blocked(20,four) asymptotic weights", th, 2.41, 0.03));
  return o;
}

json bm() { return {{"model", "BM"}}; }

json classic_estimators() {
  return json::array({qrv_json("qrv", 20), {{"type", "rv"}, {"label", "rv"}}, {{"type", "bpv"}, {"label", "bpv"}},
                      {{"type", "trv"}, {"label", "trv"}}, {{"type", "medrv"}, {"label", "medrv"}}});
}

// Table 2, BM row.
Outcome ac2() {
  Outcome o;
  const auto t = qrv::bias_efficiency_experiment(experiment(bm(), 1000, 10'000, classic_estimators(), 2010),
                                                 shared_table());
  for (const char* l : {"qrv", "rv", "bpv", "trv", "medrv"}) {
    const auto& r = row(t, l);
    o.check(near(r.bias, 1.0, 0.01) && r.failures == 0, within(std::string(l) + " bias", r.bias, 1.0, 0.01));
  }
  const std::pair<const char*, std::pair<double, double>> eff[] = {
      {"qrv", {2.41, 0.10}}, {"rv", {2.00, 0.10}}, {"bpv", {2.60, 0.10}}, {"medrv", {2.96, 0.15}}};
  for (const auto& [l, tt] : eff) {
    const auto& r = row(t, l);
    o.check(near(r.efficiency, tt.first, tt.second), within(std::string(l) + " eff", r.efficiency, tt.first, tt.second));
  }
  return o;
}

// Table 2 jump and outlier rows, and the bipower jump-bias formula.
Outcome ac3() {
  Outcome o;
  const auto est = json::array({qrv_json("qrv", 20), {{"type", "rv"}, {"label", "rv"}},
                                {{"type", "bpv"}, {"label", "bpv"}}, {{"type", "medrv"}, {"label", "medrv"}}});
  json bmj1 = bm();
  bmj1["contamination"] = {{"jumps", {{"count", 1}, {"variation", 0.25}}}};
  const auto j1 = qrv::bias_efficiency_experiment(experiment(bmj1, 1000, 10'000, est, 2011), shared_table());
  o.check(row(j1, "qrv").bias <= 1.01, "BMJ(1) qrv bias=" + fmt("%.4f", row(j1, "qrv").bias) + " (<= 1.01)");
  o.check(near(row(j1, "rv").bias, 1.25, 0.01), within("BMJ(1) rv bias", row(j1, "rv").bias, 1.25, 0.01));

  json out = bm();
  out["contamination"] = {{"outlier", 0.25}};
  const auto ot = qrv::bias_efficiency_experiment(experiment(out, 1000, 10'000, est, 2012), shared_table());
  o.check(row(ot, "qrv").bias <= 1.02, "outlier qrv bias=" + fmt("%.4f", row(ot, "qrv").bias) + " (<= 1.02)");
  o.check(near(row(ot, "bpv").bias, 1.21, 0.03), within("outlier bpv bias", row(ot, "bpv").bias, 1.21, 0.03));
  o.check(near(row(ot, "medrv").bias, 1.33, 0.04), within("outlier medrv bias", row(ot, "medrv").bias, 1.33, 0.04));

  json bmj5 = bm();
  bmj5["contamination"] = {{"jumps", {{"count", 5}, {"variation", 0.25}}}};
  const auto j5 = qrv::bias_efficiency_experiment(experiment(bmj5, 1000, 10'000, est, 2013), shared_table());
  const double formula = 1.0 + 2.0 * std::sqrt(5 * 0.25 / 1000.0);
  o.check(near(row(j5, "bpv").bias, formula, 0.02), within("BMJ(5) bpv bias", row(j5, "bpv").bias, formula, 0.02));
  return o;
}

double rmse_over_iv(const qrv::BenchTable& t, const std::string& label) {
  return std::sqrt(row(t, label).mse) / t.mean_iv;
}

// Convergence rates.
Outcome ac4() {
  Outcome o;
  const auto q = json::array({qrv_json("qrv", 20)});
  const auto a = qrv::bias_efficiency_experiment(experiment(bm(), 1000, 4000, q, 2020), shared_table());
  const auto b = qrv::bias_efficiency_experiment(experiment(bm(), 4000, 4000, q, 2021), shared_table());
  const double r1 = rmse_over_iv(b, "qrv") / rmse_over_iv(a, "qrv");
  o.check(near(r1, 0.5, 0.15), within("qrv RMSE ratio N 1000->4000", r1, 0.5, 0.15));

  // K = round(0.2 sqrt(N)): 20 at N = 10,000 and 40 at N = 40,000.
  json noisy = bm();
  noisy["contamination"] = {{"noise_gamma2", 2.5}};
  const auto s = json::array({star_json("star", 0.2)});
  const auto c = qrv::bias_efficiency_experiment(experiment(noisy, 10'000, 1000, s, 2022), shared_table());
  const auto d = qrv::bias_efficiency_experiment(experiment(noisy, 40'000, 1000, s, 2023), shared_table());
  const double r2 = rmse_over_iv(d, "star") / rmse_over_iv(c, "star");
  o.check(near(r2, 0.707, 0.15), within("qrv* RMSE ratio N 10k->40k", r2, 0.707, 0.15));
  return o;
}

// Feasible interval coverage.
Outcome ac5() {
  Outcome o;
  const auto q = json::array({qrv_json("qrv", 20)});
  const auto a = qrv::coverage_experiment(experiment(bm(), 4000, 10'000, q, 2030), 0.95, shared_table());
  const double ca = row(a, "qrv").coverage.value_or(NAN);
  o.check(near(ca, 0.95, 0.015), within("qrv+qrq coverage", ca, 0.95, 0.015));

  json noisy = bm();
  noisy["contamination"] = {{"noise_gamma2", 2.5}};
  const auto s = json::array({star_json("star", 0.2)});
  const auto b = qrv::coverage_experiment(experiment(noisy, 20'000, 5000, s, 2031), 0.95, shared_table());
  const double cb = row(b, "star").coverage.value_or(NAN);
  o.check(near(cb, 0.95, 0.02), within("qrv* coverage m=40", cb, 0.95, 0.02));
  // Shorter blocks leave more independent stretches for the variance estimate.
  const auto s20 = json::array({star_json("star", 0.2, 20)});
  const auto c20 = qrv::coverage_experiment(experiment(noisy, 20'000, 5000, s20, 2031), 0.95, shared_table());
  o.note(within("qrv* coverage m=20", row(c20, "star").coverage.value_or(NAN), 0.95, 0.02));
  return o;
}

// Noise anchors and the window-selection curves.
Outcome ac6() {
  Outcome o;
  const double gammas[] = {0.25, 2.5, 10.0};
  for (double g : gammas) {
    json noisy = bm();
    noisy["contamination"] = {{"noise_gamma2", g}};
    const auto t = qrv::bias_efficiency_experiment(
        experiment(noisy, 10'000, 2000, json::array({{{"type", "rv"}, {"label", "rv"}}}), 2040), shared_table());
    const double ratio = row(t, "rv").bias / (1.0 + 2.0 * g);
    o.check(near(ratio, 1.0, 0.01), within("E(RV)/(IV(1+2g2)) g2=" + fmt("%g", g), ratio, 1.0, 0.01));
  }

  qrv::QrvStarSpec star;
  star.lambdas = kFour;
  star.m = 40;
  std::vector<int> Ks;
  for (int K = 2; K <= 25; ++K) Ks.push_back(K);
  const std::size_t ns[] = {1000, 10'000};
  const std::size_t reps[] = {2000, 400};
  int argmin[2][3] = {};
  json msrv_cmp = json::array();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 3; ++b) {
      json noisy = bm();
      noisy["contamination"] = {{"noise_gamma2", gammas[b]}};
      const auto cfg = experiment(noisy, ns[a], reps[a], json::array(), 2050 + 10 * a + b);
      const auto curve = qrv::mse_curve_K(cfg, star, Ks, shared_table());
      if (!curve.argmin_K) {
        o.check(false, "no feasible K");
        continue;
      }
      argmin[a][b] = *curve.argmin_K;
      const auto& p = *std::find_if(curve.points.begin(), curve.points.end(),
                                    [&](const qrv::MsePoint& x) { return x.K == *curve.argmin_K; });
      o.check(near(p.bias, 1.0, 0.02), within("qrv* bias at K*=" + std::to_string(p.K) + " N=" +
                                                  std::to_string(ns[a]) + " g2=" + fmt("%g", gammas[b]),
                                              p.bias, 1.0, 0.02));
      msrv_cmp.push_back(fmt("%.2f", p.mse / curve.msrv_mse));
    }
  }
  // Nondecreasing in the noise ratio and in N, strictly increasing somewhere.
  bool mono = true, strict = false;
  for (int a = 0; a < 2; ++a)
    for (int b = 1; b < 3; ++b) {
      mono = mono && argmin[a][b] >= argmin[a][b - 1];
      strict = strict || argmin[a][b] > argmin[a][b - 1];
    }
  for (int b = 0; b < 3; ++b) {
    mono = mono && argmin[1][b] >= argmin[0][b];
    strict = strict || argmin[1][b] > argmin[0][b];
  }
  std::ostringstream ks;
  ks << "K* N=1000 {" << argmin[0][0] << "," << argmin[0][1] << "," << argmin[0][2] << "} N=10000 {"
     << argmin[1][0] << "," << argmin[1][1] << "," << argmin[1][2] << "}";
  o.check(mono && strict, ks.str() + " increasing");
  o.detail << "; MSE(qrv*)/MSE(msrv) at K*: " << msrv_cmp.dump();
  return o;
}

// Oracle equivalences.
Outcome ac7() {
  Outcome o;
  qrv::MonteCarloConfig mc = constants_mc();
  const std::pair<int, double> keys[] = {{4, 0.75}, {10, 0.9}, {16, 0.75}, {20, 0.8}, {20, 0.9}};
  double worst = 0;
  for (const auto& [m, l] : keys) {
    const auto key = qrv::scaling_key(m, l);
    const auto e = qrv::nu_moment(key, mc);
    const auto i = qrv::nu_moment(key, qrv::IntegrationConfig{});
    worst = std::max(worst, std::abs(e.value - i.value) / e.std_error);
  }
  o.check(worst <= 3.0, "nu MC vs integration max |z|=" + fmt("%.2f", worst) + " (<= 3)");

  // Constant volatility, noise ratio 10, N = 40,000, K = 21, m = 20.
  const int m = 20, K = 21;
  const std::size_t n = 40'000;
  const double gamma2 = 10.0;
  qrv::PreAvgConfig cfg;
  cfg.K = K;
  cfg.m = m;
  cfg.lambdas = qrv::QuantileVector(kFour);
  cfg.weights = qrv::optimal_weights(qrv::theta_asymptotic(cfg.lambdas).values).weights;
  auto& table = shared_table();
  table.ensure(qrv::required_keys(cfg.quantile_config()), mc);
  const int paths = 40;
  double est = 0;
  const auto model = qrv::ModelSpec::defaults(qrv::ModelKind::bm);
  double omega2 = 0, iv = 0;
  for (int p = 0; p < paths; ++p) {
    auto path = qrv::add_noise(qrv::simulate_path(model, n, 7000 + p), gamma2, 7000 + p);
    omega2 = *path.noise_omega2;
    iv = path.true_iv;
    const auto v = qrv::qrv_star_avar(path.returns(), cfg, table);
    est += qrv::achieved_theta(v.values, cfg.weights) / paths;
  }
  std::vector<double> nu;
  for (double l : kFour) nu.push_back(table.get(qrv::scaling_key(m, l)).value);
  qrv::MonteCarloConfig omc;
  omc.replications = 200'000;
  const auto sigma = qrv::sigma_m_oracle(m, kFour, nu, std::sqrt(iv), omega2,
                                         K / std::sqrt(double(n)), cfg.h, omc);
  const double target = qrv::achieved_theta(sigma, cfg.weights);
  const double rel = est / target - 1.0;
  o.check(std::abs(rel) <= 0.15, "avar estimate " + fmt("%.4g", est) + " vs oracle " + fmt("%.4g", target) +
                                     " rel " + fmt("%+.3f", rel) + " (|rel| <= 0.15)");

  // Nesting identities on interior windows.
  const auto r = qrv::simulate_path(model, 5000, 99).returns();
  const std::size_t len = r.size();
  const double nn = static_cast<double>(len);
  qrv::ScalingTable t;
  auto abs_cfg = [](int mm, double l) {
    return qrv::QuantileConfig{qrv::QuantileVector({l}, qrv::Variant::absolute), {1.0}, mm, qrv::Mode::subsampled};
  };
  const auto& x = r.returns;
  const double nu_min = qrv::closed_form_moment(qrv::scaling_key(2, 0.5, qrv::Variant::absolute))->value;
  const double nu_med = qrv::closed_form_moment(qrv::scaling_key(3, 2.0 / 3.0, qrv::Variant::absolute))->value;
  const double last_min = std::pow(std::min(std::abs(x[len - 2]), std::abs(x[len - 1])), 2);
  std::vector<double> w{std::abs(x[nn - 3]), std::abs(x[len - 2]), std::abs(x[len - 1])};
  std::sort(w.begin(), w.end());
  const double lhs_min = qrv::qrv(r, abs_cfg(2, 0.5), t).value * (nn - 2) + nn * last_min / nu_min;
  const double lhs_med = qrv::qrv(r, abs_cfg(3, 2.0 / 3.0), t).value * (nn - 3) + nn * w[1] * w[1] / nu_med;
  const double e_min = std::abs(lhs_min / (qrv::minrv(r) * (nn - 1)) - 1.0);
  const double e_med = std::abs(lhs_med / (qrv::medrv(r) * (nn - 2)) - 1.0);
  o.check(e_min <= 1e-10 && e_med <= 1e-10,
          "nesting rel err MinRV " + fmt("%.1e", e_min) + ", MedRV " + fmt("%.1e", e_med) + " (<= 1e-10)");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Determinism and round trip.
Outcome ac8(const std::string& cli) {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "qrv_acceptance";
  fs::create_directories(dir);

  // Library level: runs, experiments (1 and 2 workers), curves.
  json run_cfg{{"input", {{"simulate", {{"model", "SV-LEV"}, {"N", 2000}, {"contamination", {{"noise_gamma2", 1.0}}}}}}},
               {"seed", 5},
               {"constants", {{"replications", 200'000}}},
               {"estimators", json::array({{{"type", "rv"}}, {{"type", "bpv"}}, {{"type", "trv"}}, {{"type", "medrv"}},
                                           {{"type", "minrv"}}, {{"type", "msrv"}},
                                           qrv_json("qrv_b", 20), qrv_json("qrv_s", 20, "subsampled"),
                                           star_json("star", 0.3)})}};
  const auto cfg = qrv::run_config_from_json(run_cfg);
  const auto r1 = qrv::to_json(qrv::run(cfg)).dump();
  const auto r2 = qrv::to_json(qrv::run(cfg)).dump();
  o.check(r1 == r2, "run() reproducible");

  auto e1 = experiment(bm(), 500, 300, classic_estimators(), 77);
  auto e2 = e1;
  e2.workers = 2;
  qrv::ScalingTable ta, tb;
  const auto b1 = qrv::to_json(qrv::bias_efficiency_experiment(e1, ta));
  auto b2 = qrv::to_json(qrv::bias_efficiency_experiment(e2, tb));
  b2["config"]["workers"] = 1;
  o.check(b1.dump() == b2.dump(), "experiment identical for 1 and 2 workers");

  // Round trip through the exported CSV.
  const auto& sim = std::get<qrv::SimulateInput>(cfg.input);
  auto path = qrv::simulate_path(sim.model, sim.n, cfg.seed, sim.substeps);
  path = qrv::add_noise(std::move(path), *sim.contamination.noise_gamma2, cfg.seed);
  const auto [csv, side] = qrv::export_path(path, dir / "roundtrip.csv");
  auto csv_cfg = cfg;
  csv_cfg.input = qrv::CsvInput{csv, {}};
  const auto mem = qrv::run(cfg);
  const auto disk = qrv::run(csv_cfg);
  double worst = 0;
  for (std::size_t i = 0; i < mem.outcomes.size(); ++i) {
    const double a = mem.outcomes[i].result->value, b = disk.outcomes[i].result->value;
    worst = std::max(worst, std::abs(a - b) / std::abs(a));
  }
  o.check(worst <= 1e-12, "CSV round trip max rel diff " + fmt("%.1e", worst) + " (<= 1e-12)");

  if (cli.empty()) {
    o.check(false, "CLI path not given");
    return o;
  }
  // Command level: every subcommand twice, byte-compared.
  json bench_cfg{{"model", "BM"},
                 {"N", 500},
                 {"replications", 200},
                 {"constants", {{"replications", 200'000}}},
                 {"estimators", classic_estimators()}};
  std::ofstream(dir / "bench.json") << bench_cfg.dump();
  json est_cfg = run_cfg;
  est_cfg.erase("input");
  std::ofstream(dir / "estimate.json") << est_cfg.dump();
  json mse_cfg{{"model", "BM"},
               {"N", 2000},
               {"replications", 50},
               {"contamination", {{"noise_gamma2", 2.5}}},
               {"constants", {{"replications", 200'000}}},
               {"qrv_star", {{"lambdas", kFour}, {"m", 40}}},
               {"K", {3, 6, 9}}};
  std::ofstream(dir / "mse.json") << mse_cfg.dump();
  const std::string d = dir.string();
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"simulate", "simulate --model SV2F-LEV -N 3000 --noise 1 --jumps 2 0.25 --seed 9 --out " + d + "/sim_%.csv"},
      {"estimate", "estimate --config " + d + "/estimate.json --input " + d + "/sim_a.csv --seed 9 --out " + d +
                       "/est_%.json"},
      {"bench", "bench --config " + d + "/bench.json --seed 9 --format csv --out " + d + "/bench_%.csv"},
      {"constants", "constants --m 20 --lambda 0.9 --replications 200000 --seed 9 --out " + d + "/const_%.json"},
      {"mse-curve", "mse-curve --config " + d + "/mse.json --seed 9 --plot --out " + d + "/mse_%.csv"},
  };
  for (const auto& [name, args] : cmds) {
    std::string outs[2];
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
      std::string a = args;
      a.replace(a.find('%'), 1, k == 0 ? "a" : "b");
      const std::string line = "\"" + cli + "\" " + a + " 2>/dev/null";
      ran = ran && std::system(line.c_str()) == 0;
      const auto out = a.substr(a.rfind(' ') + 1);
      outs[k] = slurp(out);
      if (name == "simulate") outs[k] += slurp(fs::path(out).replace_extension(".json"));
      if (name == "mse-curve") outs[k] += slurp(fs::path(out).replace_extension(".svg"));
    }
    o.check(ran && !outs[0].empty() && outs[0] == outs[1], "qrv " + name + " bit-identical");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc)
      cli = argv[++i];
    else
      only.insert(a);
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
      {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", [&] { return ac8(cli); }},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << "  ("
              << fmt("%.0f", secs) << " s)" << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
