#include "qrv/run.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include <openssl/evp.h>

#include "qrv/error.hpp"

namespace qrv {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  try {
    RunConfig c;
    for (const auto& [k, v] : j.items()) {
      static const std::set<std::string> ok{"input", "estimators", "cache",        "seed",
                                            "constants", "annualization", "format"};
      if (!ok.contains(k)) throw ConfigError("run config has no field '" + k + "'");
    }
    const auto& in = j.at("input");
    if (in.contains("csv") == in.contains("simulate"))
      throw ConfigError("input needs exactly one of \"csv\" and \"simulate\"");
    if (in.contains("csv")) {
      const auto& cj = in.at("csv");
      c.input = CsvInput{cj.at("path").get<std::string>(), csv_options_from_json(cj)};
    } else {
      const auto& sj = in.at("simulate");
      SimulateInput s;
      for (const auto& [k, v] : sj.items()) {
        if (k == "model")
          s.model = model_from_json(v);
        else if (k == "N")
          s.n = v.get<std::size_t>();
        else if (k == "seed")
          s.seed = v.get<std::uint64_t>();
        else if (k == "substeps")
          s.substeps = v.get<int>();
        else if (k == "contamination")
          s.contamination = contamination_from_json(v);
        else
          throw ConfigError("simulate input has no field '" + k + "'");
      }
      c.input = s;
    }
    if (j.contains("estimators"))
      for (const auto& e : j.at("estimators")) c.estimators.push_back(estimator_from_json(e));
    if (j.contains("cache") && !j.at("cache").is_null()) c.cache = j.at("cache").get<std::string>();
    c.seed = get_or(j, "seed", c.seed);
    if (j.contains("constants")) c.constants = mc_config_from_json(j.at("constants"));
    if (j.contains("annualization")) {
      if (j.at("annualization").is_null())
        c.annualization.reset();
      else
        c.annualization = j.at("annualization").get<double>();
    }
    if (c.annualization && !(*c.annualization > 0.0)) throw ConfigError("annualization must be positive");
    c.format = get_or<std::string>(j, "format", c.format);
    if (c.format != "json" && c.format != "csv") throw ConfigError("format must be json or csv");
    std::set<std::string> labels;
    for (const auto& e : c.estimators)
      if (!labels.insert(e.label).second) throw ConfigError("duplicate estimator label '" + e.label + "'");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  json input;
  if (const auto* csv = std::get_if<CsvInput>(&c.input)) {
    json cj = to_json(csv->options);
    cj["path"] = csv->path.string();
    input["csv"] = cj;
  } else {
    const auto& s = std::get<SimulateInput>(c.input);
    input["simulate"] = json{{"model", to_json(s.model)},
                             {"N", s.n},
                             {"seed", s.seed.value_or(c.seed)},
                             {"substeps", s.substeps},
                             {"contamination", to_json(s.contamination)}};
  }
  json est = json::array();
  for (const auto& e : c.estimators) est.push_back(to_json(e));
  return json{{"input", input},
              {"estimators", est},
              {"cache", c.cache ? json(c.cache->string()) : json(nullptr)},
              {"seed", c.seed},
              {"constants", to_json(c.constants)},
              {"annualization", c.annualization ? json(*c.annualization) : json(nullptr)},
              {"format", c.format}};
}

std::string config_hash(const RunConfig& c) {
  const std::string text = to_json(c).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

Report run_on_series(const RunConfig& config, const ReturnSeries& series, json source, ScalingTable& table) {
  Report r;
  r.config = to_json(config);
  r.config_hash = config_hash(config);
  r.seed = config.seed;
  r.source = std::move(source);
  r.n_returns = series.size();
  r.annualization = config.annualization;
  std::vector<Estimator> prepared;
  for (const auto& e : config.estimators) {
    try {
      prepared.push_back(prepare(e, table, config.constants));
    } catch (const ConfigError& ex) {
      throw ConfigError("estimator '" + e.label + "': " + ex.what());
    }
  }
  for (const auto& e : prepared) {
    EstimatorOutcome o;
    o.estimator = e;
    try {
      o.result = evaluate(e, series, table);
    } catch (const std::exception& ex) {
      o.error = ex.what();
    }
    r.outcomes.push_back(std::move(o));
  }
  return r;
}

Report run(const RunConfig& config, ScalingTable& table) {
  if (const auto* csv = std::get_if<CsvInput>(&config.input)) {
    const auto in = ingest_csv(csv->path, csv->options);
    json src{{"kind", "csv"},
             {"path", csv->path.string()},
             {"records", in.records},
             {"aggregated", in.aggregated},
             {"observations", in.prices.size()}};
    return run_on_series(config, in.returns, src, table);
  }
  const auto& s = std::get<SimulateInput>(config.input);
  ExperimentConfig e;
  e.model = s.model;
  e.contamination = s.contamination;
  e.n = s.n;
  e.base_seed = s.seed.value_or(config.seed);
  e.substeps = s.substeps;
  e.validate();
  auto path = simulate_path(e.model, e.n, e.base_seed, e.substeps);
  const auto& c = e.contamination;
  if (c.jumps) path = add_jumps(std::move(path), c.jumps->count, c.jumps->variation, e.base_seed);
  if (c.outlier) path = add_outlier(std::move(path), *c.outlier, e.base_seed);
  if (c.noise_gamma2) path = add_noise(std::move(path), *c.noise_gamma2, e.base_seed);
  json src = path_sidecar(path);
  src["kind"] = "simulate";
  return run_on_series(config, path.returns(), src, table);
}

Report run(const RunConfig& config) {
  ScalingTable table = config.cache ? ScalingTable(*config.cache) : ScalingTable();
  return run(config, table);
}

namespace {

std::optional<double> annualized(const Report& r, double value) {
  if (!r.annualization || !(value >= 0.0)) return std::nullopt;
  return std::sqrt(value * *r.annualization);
}

}  // namespace

json to_json(const Report& r) {
  json results = json::array();
  for (const auto& o : r.outcomes) {
    json j{{"estimator", o.estimator.label}, {"type", type_name(o.estimator.spec)}, {"params", to_json(o.estimator)}};
    if (o.result) {
      const auto& e = *o.result;
      j["value"] = e.value;
      j["stderr"] = e.std_error ? json(*e.std_error) : json(nullptr);
      j["asymptotic_variance"] = e.asymptotic_variance ? json(*e.asymptotic_variance) : json(nullptr);
      j["ci"] = e.ci ? json{{"lower", e.ci->lower}, {"upper", e.ci->upper}, {"level", e.ci->level}} : json(nullptr);
      j["diagnostics"] = e.diagnostics;
      const auto a = annualized(r, e.value);
      j["annualized_vol"] = a ? json(*a) : json(nullptr);
      j["error"] = nullptr;
    } else {
      j["value"] = nullptr;
      j["stderr"] = nullptr;
      j["asymptotic_variance"] = nullptr;
      j["ci"] = nullptr;
      j["diagnostics"] = json::object();
      j["annualized_vol"] = nullptr;
      j["error"] = o.error.value_or("unknown error");
    }
    results.push_back(j);
  }
  return json{{"config_hash", r.config_hash}, {"seed", r.seed},       {"config", r.config},
              {"source", r.source},           {"n_returns", r.n_returns}, {"results", results}};
}

void write_report_csv(std::ostream& os, const Report& r) {
  os << "estimator,type,value,stderr,ci_lower,ci_upper,ci_level,annualized_vol,diagnostics,error\n";
  for (const auto& o : r.outcomes) {
    os << csv_field(o.estimator.label) << ',' << type_name(o.estimator.spec) << ',';
    if (o.result) {
      const auto& e = *o.result;
      std::string diag;
      for (const auto& [k, v] : e.diagnostics) diag += (diag.empty() ? "" : ";") + k + "=" + num(v);
      const auto a = annualized(r, e.value);
      os << num(e.value) << ',' << (e.std_error ? num(*e.std_error) : "") << ','
         << (e.ci ? num(e.ci->lower) : "") << ',' << (e.ci ? num(e.ci->upper) : "") << ','
         << (e.ci ? num(e.ci->level) : "") << ',' << (a ? num(*a) : "") << ',' << csv_field(diag) << ",\n";
    } else {
      os << ",,,,,,," << csv_field(o.error.value_or("unknown error")) << '\n';
    }
  }
}

}  // namespace qrv
