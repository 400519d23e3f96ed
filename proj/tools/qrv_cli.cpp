#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qrv/bench.hpp"
#include "qrv/error.hpp"
#include "qrv/io.hpp"
#include "qrv/run.hpp"
#include "qrv/scaling_table.hpp"
#include "qrv/svg.hpp"
#include "qrv/theta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::string cache;
  bool plot = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qrv::ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw qrv::ConfigError(path + ": " + e.what());
  }
}

qrv::ScalingTable open_table(const Common& c) {
  return c.cache.empty() ? qrv::ScalingTable() : qrv::ScalingTable(fs::path(c.cache));
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const Common& c, Fn&& write) {
  if (c.out.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw qrv::DataError("cannot write " + c.out);
  write(os);
}

void emit_json(const Common& c, const json& j) {
  emit(c, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

fs::path plot_path(const Common& c) {
  if (c.out.empty()) throw qrv::ConfigError("--plot needs --out; the chart goes next to it as .svg");
  return fs::path(c.out).replace_extension(".svg");
}

void write_chart(const fs::path& path, const qrv::SvgChart& chart) {
  std::ofstream os(path);
  if (!os) throw qrv::DataError("cannot write " + path.string());
  qrv::write_svg_chart(os, chart);
}

// estimate ------------------------------------------------------------------

int cmd_estimate(const Common& c, const std::string& input) {
  json j = c.config.empty() ? json::object() : read_json(c.config);
  if (!input.empty()) {
    json csv = j.contains("input") && j["input"].contains("csv") ? j["input"]["csv"] : json::object();
    csv["path"] = input;
    j["input"] = json{{"csv", csv}};
  }
  if (!j.contains("input")) throw qrv::ConfigError("estimate needs --input or an input section in --config");
  if (c.config.empty())
    j["estimators"] = json::array({{{"type", "rv"}}, {{"type", "bpv"}}, {{"type", "medrv"}}, {{"type", "qrv"},
                                                                                            {"lambdas", {0.8, 0.85, 0.9, 0.95}},
                                                                                            {"m", 20}}});
  auto config = qrv::run_config_from_json(j);
  if (c.seed) config.seed = *c.seed;
  if (!c.cache.empty()) config.cache = c.cache;
  if (c.format != "json" || !j.contains("format")) config.format = c.format;
  const auto report = qrv::run(config);
  emit(c, [&](std::ostream& os) {
    if (config.format == "csv")
      qrv::write_report_csv(os, report);
    else
      os << qrv::to_json(report).dump(2) << '\n';
  });
  for (const auto& o : report.outcomes)
    if (o.error) std::cerr << "qrv: " << o.estimator.label << ": " << *o.error << '\n';
  return 0;
}

// simulate ------------------------------------------------------------------

struct SimFlags {
  std::string model = "BM";
  std::size_t n = 1000;
  int substeps = 10;
  std::vector<double> jumps;
  std::optional<double> outlier;
  std::optional<double> noise;
};

int cmd_simulate(const Common& c, const SimFlags& f) {
  qrv::SimulateInput s;
  if (!c.config.empty()) {
    json wrapped{{"input", {{"simulate", read_json(c.config)}}}};
    s = std::get<qrv::SimulateInput>(qrv::run_config_from_json(wrapped).input);
  } else {
    s.model.kind = qrv::parse_model_kind(f.model);
    s.n = f.n;
    s.substeps = f.substeps;
    if (!f.jumps.empty()) {
      if (f.jumps.size() != 2) throw qrv::ConfigError("--jumps takes COUNT VARIATION");
      s.contamination.jumps = qrv::JumpSpec{static_cast<std::size_t>(f.jumps[0]), f.jumps[1]};
    }
    s.contamination.outlier = f.outlier;
    s.contamination.noise_gamma2 = f.noise;
  }
  if (c.seed) s.seed = *c.seed;
  const std::uint64_t seed = s.seed.value_or(2010);
  s.model.validate();
  auto path = qrv::simulate_path(s.model, s.n, seed, s.substeps);
  const auto& k = s.contamination;
  if (k.jumps) path = qrv::add_jumps(std::move(path), k.jumps->count, k.jumps->variation, seed);
  if (k.outlier) path = qrv::add_outlier(std::move(path), *k.outlier, seed);
  if (k.noise_gamma2) path = qrv::add_noise(std::move(path), *k.noise_gamma2, seed);
  if (c.out.empty()) {
    qrv::write_path_csv(std::cout, path);
    std::cerr << qrv::path_sidecar(path).dump() << '\n';
  } else {
    const auto [csv, side] = qrv::export_path(path, c.out);
    std::cerr << "qrv: wrote " << csv.string() << " and " << side.string() << '\n';
  }
  return 0;
}

// bench ---------------------------------------------------------------------

std::vector<qrv::ThetaKind> parse_kinds(const json& j) {
  std::vector<qrv::ThetaKind> out;
  for (const auto& k : j) out.push_back(qrv::parse_theta_kind(k.get<std::string>()));
  return out;
}

int cmd_bench(const Common& c, const std::string& study, std::optional<double> level) {
  if (c.config.empty()) throw qrv::ConfigError("bench needs --config");
  const json j = read_json(c.config);
  auto table = open_table(c);
  if (study == "efficiency") {
    // {"m": [...], "quantile_sets": [[...]], "kinds": [...], "constants": {...}}
    qrv::MonteCarloConfig mc;
    if (j.contains("constants")) mc = qrv::mc_config_from_json(j.at("constants"));
    if (c.seed) mc.seed = *c.seed;
    const auto cells = qrv::efficiency_table(j.at("m").get<std::vector<int>>(),
                                             j.at("quantile_sets").get<std::vector<std::vector<double>>>(),
                                             parse_kinds(j.at("kinds")), table, mc);
    emit(c, [&](std::ostream& os) {
      if (c.format == "csv")
        qrv::write_csv(os, cells);
      else
        os << qrv::to_json(cells).dump(2) << '\n';
    });
    return 0;
  }
  auto config = qrv::experiment_from_json(j);
  if (c.seed) config.base_seed = *c.seed;
  qrv::BenchTable t;
  if (study == "coverage") {
    t = qrv::coverage_experiment(config, level.value_or(0.95), table);
  } else if (study == "bias") {
    t = qrv::bias_efficiency_experiment(config, table);
  } else {
    throw qrv::ConfigError("unknown study '" + study + "' (bias, coverage, efficiency)");
  }
  emit(c, [&](std::ostream& os) {
    if (c.format == "csv")
      qrv::write_csv(os, t);
    else
      os << qrv::to_json(t).dump(2) << '\n';
  });
  if (c.plot) {
    qrv::SvgChart chart{"Efficiency by estimator", "estimator index", "efficiency", {}};
    qrv::SvgSeries s{"efficiency", {}, {}, false};
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      s.xs.push_back(static_cast<double>(i));
      s.ys.push_back(t.rows[i].efficiency);
    }
    chart.series.push_back(s);
    write_chart(plot_path(c), chart);
  }
  return 0;
}

// constants -----------------------------------------------------------------

qrv::MomentKey key_from_json(const json& j) {
  for (const auto& [k, v] : j.items())
    if (k != "m" && k != "lambda" && k != "lambda2" && k != "r" && k != "variant" && k != "kind" && k != "lag")
      throw qrv::ConfigError("moment key has no field '" + k + "'");
  qrv::MomentKey key;
  key.m = j.at("m").get<int>();
  key.lambda = j.at("lambda").get<double>();
  if (j.contains("lambda2")) key.lambda2 = j.at("lambda2").get<double>();
  if (j.contains("r")) key.r = j.at("r").get<double>();
  if (j.contains("variant")) key.variant = qrv::parse_variant(j.at("variant").get<std::string>());
  if (j.contains("kind")) key.kind = qrv::parse_moment_kind(j.at("kind").get<std::string>());
  if (j.contains("lag")) key.lag = j.at("lag").get<int>();
  key.validate();
  return key;
}

json theta_json(const qrv::ThetaMatrix& t) {
  const auto k = static_cast<Eigen::Index>(t.lambdas.size());
  json values = json::array(), se = json::array();
  for (Eigen::Index i = 0; i < k; ++i) {
    json vr = json::array(), sr = json::array();
    for (Eigen::Index l = 0; l < k; ++l) {
      vr.push_back(t.values(i, l));
      sr.push_back(t.std_error(i, l));
    }
    values.push_back(vr);
    se.push_back(sr);
  }
  return json{{"kind", qrv::to_string(t.kind)},
              {"m", t.m ? json(*t.m) : json(nullptr)},
              {"variant", qrv::to_string(t.variant)},
              {"lambdas", t.lambdas},
              {"values", values},
              {"stderr", se},
              {"replications", t.replications},
              {"seed", t.seed}};
}

struct ConstFlags {
  std::optional<int> m;
  std::optional<double> lambda;
  std::optional<double> lambda2;
  double r = 1.0;
  std::string variant = "signed";
  std::string kind = "scaling";
  std::string method = "monte-carlo";
  std::optional<std::uint64_t> replications;
};

int cmd_constants(const Common& c, const ConstFlags& f) {
  json j;
  if (!c.config.empty()) {
    j = read_json(c.config);
  } else {
    if (!f.m || !f.lambda) throw qrv::ConfigError("constants needs --config or both --m and --lambda");
    json key{{"m", *f.m}, {"lambda", *f.lambda}, {"r", f.r}, {"variant", f.variant}, {"kind", f.kind}};
    if (f.lambda2) key["lambda2"] = *f.lambda2;
    j = json{{"keys", json::array({key})}, {"method", f.method}};
  }
  for (const auto& [k, v] : j.items())
    if (k != "keys" && k != "theta" && k != "method" && k != "constants")
      throw qrv::ConfigError("constants config has no field '" + k + "'");
  qrv::MonteCarloConfig mc;
  if (j.contains("constants")) mc = qrv::mc_config_from_json(j.at("constants"));
  if (f.replications) mc.replications = *f.replications;
  if (c.seed) mc.seed = *c.seed;
  const auto method = qrv::parse_method(j.value("method", std::string("monte-carlo")));
  qrv::Precision precision = mc;
  if (method == qrv::Method::integration) precision = qrv::IntegrationConfig{};
  auto table = open_table(c);
  json out{{"moments", json::array()}, {"theta", json::array()}};
  if (j.contains("keys")) {
    for (const auto& kj : j.at("keys")) {
      const auto key = key_from_json(kj);
      qrv::MomentEstimate est;
      if (method == qrv::Method::integration) {
        est = qrv::nu_moment(key, precision);
      } else {
        est = table.get_or_compute(key, precision);
      }
      out["moments"].push_back(json{{"key", key.to_string()},
                                    {"value", est.value},
                                    {"stderr", est.std_error},
                                    {"method", qrv::to_string(est.method)},
                                    {"replications", est.replications},
                                    {"seed", est.seed}});
    }
  }
  if (j.contains("theta")) {
    for (const auto& tj : j.at("theta")) {
      const auto kind = qrv::parse_theta_kind(tj.at("kind").get<std::string>());
      const auto variant = qrv::parse_variant(tj.value("variant", std::string("signed")));
      const qrv::QuantileVector lambdas(tj.at("lambdas").get<std::vector<double>>(), variant);
      std::optional<int> m;
      if (kind != qrv::ThetaKind::asymptotic) m = tj.at("m").get<int>();
      auto theta = table.find_theta(kind, variant, m, lambdas.values());
      if (!theta) {
        switch (kind) {
          case qrv::ThetaKind::blocked: theta = qrv::theta_blocked(*m, lambdas, mc); break;
          case qrv::ThetaKind::subsampled: theta = qrv::theta_subsampled(*m, lambdas, mc); break;
          case qrv::ThetaKind::asymptotic: theta = qrv::theta_asymptotic(lambdas); break;
        }
        if (kind != qrv::ThetaKind::asymptotic) table.put_theta(*theta);
      }
      out["theta"].push_back(theta_json(*theta));
    }
  }
  emit_json(c, out);
  return 0;
}

// mse-curve -----------------------------------------------------------------

int cmd_mse_curve(const Common& c) {
  // Experiment fields plus "qrv_star": {estimator fields} and "K": [...].
  if (c.config.empty()) throw qrv::ConfigError("mse-curve needs --config");
  json j = read_json(c.config);
  if (!j.contains("qrv_star") || !j.contains("K")) throw qrv::ConfigError("mse-curve config needs qrv_star and K");
  json star_j = j.at("qrv_star");
  star_j["type"] = "qrv_star";
  if (!star_j.contains("K") && !star_j.contains("c")) star_j["K"] = 2;  // replaced per point
  const auto star = std::get<qrv::QrvStarSpec>(qrv::estimator_from_json(star_j).spec);
  const auto Ks = j.at("K").get<std::vector<int>>();
  j.erase("qrv_star");
  j.erase("K");
  auto config = qrv::experiment_from_json(j);
  if (c.seed) config.base_seed = *c.seed;
  auto table = open_table(c);
  const auto curve = qrv::mse_curve_K(config, star, Ks, table);
  for (const auto& why : curve.skipped) std::cerr << "qrv: skipped " << why << '\n';
  emit(c, [&](std::ostream& os) {
    if (c.format == "csv")
      qrv::write_csv(os, curve);
    else
      os << qrv::to_json(curve).dump(2) << '\n';
  });
  if (c.plot) {
    qrv::SvgSeries q{"QRV*", {}, {}, false};
    for (const auto& p : curve.points)
      if (p.feasible) {
        q.xs.push_back(p.K);
        q.ys.push_back(p.log_mse);
      }
    qrv::SvgSeries ms{"MSRV", {}, {curve.msrv_log_mse}, true};
    std::ostringstream title;
    title << "log MSE against K, N=" << config.n;
    if (config.contamination.noise_gamma2) title << ", noise ratio " << *config.contamination.noise_gamma2;
    write_chart(plot_path(c), qrv::SvgChart{title.str(), "K", "log MSE", {q, ms}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantile-based realized variance toolkit"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON configuration file");
    sub->add_option("--seed", common.seed, "Seed override");
    sub->add_option("--out", common.out, "Output path (default stdout)");
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--cache", common.cache, "Constants cache file");
    sub->add_flag("--plot", common.plot, "Also write an SVG chart next to --out");
  };

  auto* estimate = app.add_subcommand("estimate", "Estimate integrated variance from a tick CSV");
  add_common(estimate);
  std::string input;
  estimate->add_option("--input", input, "Tick CSV (timestamp,price[,volume])");

  auto* simulate = app.add_subcommand("simulate", "Simulate a log-price path to CSV and JSON");
  add_common(simulate);
  SimFlags sim;
  simulate->add_option("--model", sim.model, "BM, SV, SV-LEV, SEV-ND or SV2F-LEV");
  simulate->add_option("-N,--n", sim.n, "Number of returns");
  simulate->add_option("--substeps", sim.substeps, "Fine steps per return");
  simulate->add_option("--jumps", sim.jumps, "Jump count and variation share")->expected(2);
  simulate->add_option("--outlier", sim.outlier, "Outlier variation share");
  simulate->add_option("--noise", sim.noise, "Noise ratio gamma^2");

  auto* bench = app.add_subcommand("bench", "Replication studies");
  add_common(bench);
  std::string study = "bias";
  std::optional<double> level;
  bench->add_option("--study", study, "bias, coverage or efficiency")
      ->check(CLI::IsMember({"bias", "coverage", "efficiency"}));
  bench->add_option("--level", level, "Interval level for the coverage study");

  auto* constants = app.add_subcommand("constants", "Order-statistic moments and efficiency matrices");
  add_common(constants);
  ConstFlags cf;
  constants->add_option("--m", cf.m, "Block length");
  constants->add_option("--lambda", cf.lambda, "Quantile");
  constants->add_option("--lambda2", cf.lambda2, "Second quantile for a cross moment");
  constants->add_option("--r", cf.r, "Moment order");
  constants->add_option("--variant", cf.variant, "signed or absolute");
  constants->add_option("--kind", cf.kind, "scaling or quarticity");
  constants->add_option("--method", cf.method, "monte-carlo or integration");
  constants->add_option("--replications", cf.replications, "Monte Carlo replications");

  auto* mse = app.add_subcommand("mse-curve", "MSE of the pre-averaged estimator across window lengths");
  add_common(mse);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) return cmd_estimate(common, input);
    if (*simulate) return cmd_simulate(common, sim);
    if (*bench) return cmd_bench(common, study, level);
    if (*constants) return cmd_constants(common, cf);
    if (*mse) return cmd_mse_curve(common);
  } catch (const qrv::ConfigError& e) {
    std::cerr << "qrv: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const qrv::DataError& e) {
    std::cerr << "qrv: data error: " << e.what() << '\n';
    return 3;
  } catch (const qrv::NumericalError& e) {
    std::cerr << "qrv: numerical error: " << e.what() << '\n';
    return 4;
  } catch (const json::exception& e) {
    std::cerr << "qrv: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qrv: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
