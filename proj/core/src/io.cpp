#include "qrv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "qrv/error.hpp"
#include "qrv/numeric.hpp"

namespace qrv {

using nlohmann::json;

json to_json(const CsvOptions& o) {
  json j{{"timestamp_column", o.timestamp_column},
         {"price_column", o.price_column},
         {"delimiter", std::string(1, o.delimiter)}};
  j["volume_column"] = o.volume_column ? json(*o.volume_column) : json(nullptr);
  j["resample_interval"] = o.resample_interval ? json(*o.resample_interval) : json(nullptr);
  return j;
}

CsvOptions csv_options_from_json(const json& j) {
  CsvOptions o;
  for (const auto& [k, v] : j.items()) {
    if (k == "timestamp_column") {
      o.timestamp_column = v.get<std::string>();
    } else if (k == "price_column") {
      o.price_column = v.get<std::string>();
    } else if (k == "volume_column") {
      if (!v.is_null()) o.volume_column = v.get<std::string>();
    } else if (k == "delimiter") {
      const auto d = v.get<std::string>();
      if (d.size() != 1) throw ConfigError("CSV delimiter must be a single character");
      o.delimiter = d[0];
    } else if (k == "resample_interval") {
      if (!v.is_null()) o.resample_interval = v.get<std::int64_t>();
    } else if (k != "path") {
      throw ConfigError("CSV input has no field '" + k + "'");
    }
  }
  return o;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, char d) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == d) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

DataError row_error(const std::string& source, std::size_t line, const std::string& what) {
  return DataError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Tick> read_ticks(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split(line, options.delimiter);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty CSV file");
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ts_col = column(options.timestamp_column);
  const auto px_col = column(options.price_column);
  if (!ts_col) throw DataError(source + ": header has no column '" + options.timestamp_column + "'");
  if (!px_col) throw DataError(source + ": header has no column '" + options.price_column + "'");
  std::optional<std::size_t> vol_col;
  if (options.volume_column) {
    vol_col = column(*options.volume_column);
    if (!vol_col) throw DataError(source + ": header has no column '" + *options.volume_column + "'");
  } else {
    vol_col = column("volume");
  }

  std::vector<Tick> ticks;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, options.delimiter);
    if (f.size() != header.size())
      throw row_error(source, lineno,
                      "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(f.size()));
    Tick t;
    const auto& ts = f[*ts_col];
    auto r1 = std::from_chars(ts.data(), ts.data() + ts.size(), t.timestamp);
    if (r1.ec != std::errc() || r1.ptr != ts.data() + ts.size())
      throw row_error(source, lineno, "bad timestamp '" + ts + "'");
    const auto& px = f[*px_col];
    auto r2 = std::from_chars(px.data(), px.data() + px.size(), t.price);
    if (r2.ec != std::errc() || r2.ptr != px.data() + px.size())
      throw row_error(source, lineno, "bad price '" + px + "'");
    if (!(t.price > 0.0) || !std::isfinite(t.price))
      throw row_error(source, lineno, "price must be positive and finite, got '" + px + "'");
    if (vol_col) {
      const auto& vs = f[*vol_col];
      double v = 0.0;
      auto r3 = std::from_chars(vs.data(), vs.data() + vs.size(), v);
      if (r3.ec != std::errc() || r3.ptr != vs.data() + vs.size())
        throw row_error(source, lineno, "bad volume '" + vs + "'");
      if (!(v >= 0.0) || !std::isfinite(v)) throw row_error(source, lineno, "volume must be nonnegative");
      t.volume = v;
    }
    ticks.push_back(t);
  }
  return ticks;
}

void aggregate_ticks(std::vector<Tick> ticks, std::vector<std::int64_t>& timestamps, std::vector<double>& prices) {
  std::stable_sort(ticks.begin(), ticks.end(), [](const Tick& a, const Tick& b) { return a.timestamp < b.timestamp; });
  timestamps.clear();
  prices.clear();
  for (std::size_t i = 0; i < ticks.size();) {
    std::size_t j = i;
    CompensatedSum pv, v, p;
    while (j < ticks.size() && ticks[j].timestamp == ticks[i].timestamp) {
      p.add(ticks[j].price);
      if (ticks[j].volume) {
        pv.add(ticks[j].price * *ticks[j].volume);
        v.add(*ticks[j].volume);
      }
      ++j;
    }
    const double count = static_cast<double>(j - i);
    timestamps.push_back(ticks[i].timestamp);
    prices.push_back(v.value() > 0.0 ? pv.value() / v.value() : p.value() / count);
    i = j;
  }
}

void resample_last_tick(std::vector<std::int64_t>& timestamps, std::vector<double>& prices, std::int64_t interval) {
  if (interval <= 0) throw ConfigError("resample interval must be positive");
  if (timestamps.empty()) return;
  std::vector<std::int64_t> ts;
  std::vector<double> px;
  std::size_t i = 0;
  for (std::int64_t g = timestamps.front(); g <= timestamps.back(); g += interval) {
    while (i + 1 < timestamps.size() && timestamps[i + 1] <= g) ++i;
    ts.push_back(g);
    px.push_back(prices[i]);
  }
  timestamps = std::move(ts);
  prices = std::move(px);
}

IngestResult ingest_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
  auto ticks = read_ticks(in, options, source);
  IngestResult r;
  r.records = ticks.size();
  aggregate_ticks(std::move(ticks), r.timestamps, r.prices);
  r.aggregated = r.records - r.prices.size();
  if (options.resample_interval) resample_last_tick(r.timestamps, r.prices, *options.resample_interval);
  if (r.prices.size() < 2)
    throw DataError(source + ": need at least 2 distinct-timestamp prices, found " + std::to_string(r.prices.size()));
  r.returns = log_returns(r.prices);
  return r;
}

IngestResult ingest_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_csv(in, options, path.string());
}

void write_path_csv(std::ostream& os, const PathResult& path) {
  os << "timestamp,price\n";
  char buf[48];
  for (std::size_t i = 0; i < path.log_prices.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", std::exp(path.log_prices[i]));
    os << i << ',' << buf << '\n';
  }
}

json path_sidecar(const PathResult& p) {
  json j{{"model", p.model},
         {"seed", p.seed},
         {"substeps", p.substeps},
         {"N", p.n()},
         {"true_iv", p.true_iv},
         {"true_iq", p.true_iq},
         {"jump_times", p.jump_times},
         {"jump_sizes", p.jump_sizes},
         {"truncations", p.truncations},
         {"price_column", "exp(log price), log price starts at 0"}};
  j["outlier_index"] = p.outlier_index ? json(*p.outlier_index) : json(nullptr);
  j["outlier_size"] = p.outlier_size ? json(*p.outlier_size) : json(nullptr);
  j["noise_omega2"] = p.noise_omega2 ? json(*p.noise_omega2) : json(nullptr);
  return j;
}

std::pair<std::filesystem::path, std::filesystem::path> export_path(const PathResult& path,
                                                                    const std::filesystem::path& csv_path) {
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  {
    std::ofstream os(csv_path);
    if (!os) throw DataError("cannot write " + csv_path.string());
    write_path_csv(os, path);
  }
  std::ofstream js(json_path);
  if (!js) throw DataError("cannot write " + json_path.string());
  js << path_sidecar(path).dump(2) << '\n';
  return {csv_path, json_path};
}

}  // namespace qrv
