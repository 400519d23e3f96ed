#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrv/estimators.hpp"
#include "qrv/simulate.hpp"

namespace qrv {

struct CsvOptions {
  std::string timestamp_column = "timestamp";
  std::string price_column = "price";
  // Unset: use a column named "volume" when the header has one.
  std::optional<std::string> volume_column;
  char delimiter = ',';
  // Last-tick sampling on a grid of this spacing (timestamp units) starting
  // at the first timestamp. Unset: event time.
  std::optional<std::int64_t> resample_interval;
};

nlohmann::json to_json(const CsvOptions& o);
CsvOptions csv_options_from_json(const nlohmann::json& j);

struct Tick {
  std::int64_t timestamp = 0;
  double price = 0.0;
  std::optional<double> volume;
};

struct IngestResult {
  std::vector<std::int64_t> timestamps;  // one per observation after aggregation
  std::vector<double> prices;
  std::size_t records = 0;     // data rows read
  std::size_t aggregated = 0;  // rows merged into an earlier row of equal timestamp
  ReturnSeries returns;
};

// Header row required. Errors name the 1-based line number.
std::vector<Tick> read_ticks(std::istream& in, const CsvOptions& options, const std::string& source = "<stream>");

// Stable sort by timestamp, then one volume-weighted average price per
// timestamp (plain mean when volumes are absent or sum to zero).
void aggregate_ticks(std::vector<Tick> ticks, std::vector<std::int64_t>& timestamps, std::vector<double>& prices);

// Price at each grid point t0, t0 + interval, ... <= last timestamp is the
// last observed price at or before it.
void resample_last_tick(std::vector<std::int64_t>& timestamps, std::vector<double>& prices, std::int64_t interval);

IngestResult ingest_csv(std::istream& in, const CsvOptions& options, const std::string& source = "<stream>");
IngestResult ingest_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// "timestamp,price" rows with timestamp = index and price = exp(log price),
// written with 17 significant digits.
void write_path_csv(std::ostream& os, const PathResult& path);
nlohmann::json path_sidecar(const PathResult& path);
// Writes <stem>.csv and <stem>.json next to each other; returns both paths.
std::pair<std::filesystem::path, std::filesystem::path> export_path(const PathResult& path,
                                                                    const std::filesystem::path& csv_path);

}  // namespace qrv
