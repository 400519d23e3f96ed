#include "qrv/scaling_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "qrv/error.hpp"

namespace qrv {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("constants cache line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("constants cache line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
}

}  // namespace

ScalingTable::ScalingTable() : mutex_(std::make_unique<std::shared_mutex>()) {}

ScalingTable::ScalingTable(std::filesystem::path cache_file)
    : file_(std::move(cache_file)), mutex_(std::make_unique<std::shared_mutex>()) {
  load();
}

ScalingTable::ScalingTable(ScalingTable&&) noexcept = default;
ScalingTable& ScalingTable::operator=(ScalingTable&&) noexcept = default;
ScalingTable::~ScalingTable() = default;

std::string ScalingTable::format_record(const MomentKey& key, const MomentEstimate& est) {
  std::ostringstream os;
  os << "N " << to_string(key.variant) << ' ' << to_string(key.kind) << ' ' << key.m << ' '
     << g17(key.lambda) << ' ' << (key.lambda2 ? g17(*key.lambda2) : "-") << ' ' << g17(key.r)
     << ' ' << (key.lag ? std::to_string(*key.lag) : "-") << ' ' << g17(est.value) << ' '
     << g17(est.std_error) << ' ' << to_string(est.method) << ' ' << est.replications << ' '
     << est.seed;
  return os.str();
}

std::string ScalingTable::format_theta_record(const ThetaMatrix& t) {
  std::ostringstream os;
  const auto k = t.values.rows();
  os << "T " << to_string(t.kind) << ' ' << to_string(t.variant) << ' '
     << (t.m ? std::to_string(*t.m) : "-") << ' ' << k;
  for (double l : t.lambdas) os << ' ' << g17(l);
  os << ' ' << t.replications << ' ' << t.seed;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) os << ' ' << g17(t.values(i, j));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) os << ' ' << g17(t.std_error(i, j));
  return os.str();
}

ScalingTable::ThetaId ScalingTable::theta_id(ThetaKind kind, Variant variant, std::optional<int> m,
                                             std::span<const double> lambdas) {
  ThetaId id{kind, variant, m.value_or(0), {}};
  for (double l : lambdas) id.ranks.push_back(std::lround(l * 1e9));
  return id;
}

void ScalingTable::load() {
  if (!file_ || !std::filesystem::exists(*file_)) return;
  std::ifstream in(*file_);
  if (!in) throw DataError("cannot open constants cache " + file_->string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != kHeader)
        throw DataError("constants cache " + file_->string() + " has unknown header '" + line + "'");
      continue;
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream is(line);
    std::vector<std::string> f;
    for (std::string tok; is >> tok;) f.push_back(tok);
    auto bad = [&] { return DataError("constants cache line " + std::to_string(lineno) + " is malformed"); };
    try {
      if (f[0] == "N") {
        if (f.size() != 13) throw bad();
        MomentKey k;
        k.variant = parse_variant(f[1]);
        k.kind = parse_moment_kind(f[2]);
        k.m = static_cast<int>(parse_u64(f[3], lineno));
        k.lambda = parse_double(f[4], lineno);
        if (f[5] != "-") k.lambda2 = parse_double(f[5], lineno);
        k.r = parse_double(f[6], lineno);
        if (f[7] != "-") k.lag = static_cast<int>(parse_u64(f[7], lineno));
        MomentEstimate e{parse_double(f[8], lineno), parse_double(f[9], lineno),
                         parse_method(f[10]), parse_u64(f[11], lineno), parse_u64(f[12], lineno)};
        k.validate();
        entries_[k] = e;
      } else if (f[0] == "T") {
        if (f.size() < 5) throw bad();
        ThetaMatrix t;
        t.kind = parse_theta_kind(f[1]);
        t.variant = parse_variant(f[2]);
        if (f[3] != "-") t.m = static_cast<int>(parse_u64(f[3], lineno));
        const auto k = static_cast<Eigen::Index>(parse_u64(f[4], lineno));
        const std::size_t need = 5 + static_cast<std::size_t>(k) + 2 + 2 * static_cast<std::size_t>(k * k);
        if (f.size() != need) throw bad();
        std::size_t pos = 5;
        for (Eigen::Index i = 0; i < k; ++i) t.lambdas.push_back(parse_double(f[pos++], lineno));
        t.replications = parse_u64(f[pos++], lineno);
        t.seed = parse_u64(f[pos++], lineno);
        t.values.resize(k, k);
        t.std_error.resize(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
          for (Eigen::Index j = 0; j < k; ++j) t.values(i, j) = parse_double(f[pos++], lineno);
        for (Eigen::Index i = 0; i < k; ++i)
          for (Eigen::Index j = 0; j < k; ++j) t.std_error(i, j) = parse_double(f[pos++], lineno);
        thetas_[theta_id(t.kind, t.variant, t.m, t.lambdas)] = t;
      } else {
        throw bad();
      }
    } catch (const ConfigError& e) {
      throw DataError("constants cache line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ScalingTable::append_line(const std::string& line) {
  if (!file_) return;
  const bool fresh = !std::filesystem::exists(*file_) || std::filesystem::file_size(*file_) == 0;
  std::ofstream out(*file_, std::ios::app);
  if (!out) throw DataError("cannot append to constants cache " + file_->string());
  if (fresh) out << kHeader << '\n';
  out << line << '\n';
}

std::optional<MomentEstimate> ScalingTable::find(const MomentKey& key) const {
  std::shared_lock lock(*mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

MomentEstimate ScalingTable::get(const MomentKey& key) const {
  if (auto cf = closed_form_moment(key)) return *cf;
  if (auto e = find(key)) return *e;
  throw ConfigError("missing scaling constant " + key.to_string() +
                    " (compute it with `qrv constants` or ScalingTable::ensure)");
}

void ScalingTable::put(const MomentKey& key, const MomentEstimate& est) {
  key.validate();
  std::unique_lock lock(*mutex_);
  entries_[key] = est;
  append_line(format_record(key, est));
}

MomentEstimate ScalingTable::get_or_compute(const MomentKey& key, const Precision& precision) {
  if (auto cf = closed_form_moment(key)) return *cf;
  if (auto e = find(key)) return *e;
  const auto est = nu_moment(key, precision);
  put(key, est);
  return est;
}

void ScalingTable::ensure(std::span<const MomentKey> keys, const MonteCarloConfig& mc) {
  std::map<std::pair<int, Variant>, std::vector<MomentKey>> groups;
  for (const auto& k : keys) {
    k.validate();
    if (closed_form_moment(k) || find(k)) continue;
    if (k.lag) {
      put(k, nu_moment(k, mc));
      continue;
    }
    auto& g = groups[{k.m, k.variant}];
    if (std::find(g.begin(), g.end(), k) == g.end()) g.push_back(k);
  }
  for (const auto& [id, group] : groups) {
    const auto est = nu_moments(group, mc);
    for (std::size_t i = 0; i < group.size(); ++i) put(group[i], est[i]);
  }
}

std::optional<ThetaMatrix> ScalingTable::find_theta(ThetaKind kind, Variant variant,
                                                    std::optional<int> m,
                                                    std::span<const double> lambdas) const {
  std::shared_lock lock(*mutex_);
  if (auto it = thetas_.find(theta_id(kind, variant, m, lambdas)); it != thetas_.end())
    return it->second;
  return std::nullopt;
}

void ScalingTable::put_theta(const ThetaMatrix& theta) {
  std::unique_lock lock(*mutex_);
  thetas_[theta_id(theta.kind, theta.variant, theta.m, theta.lambdas)] = theta;
  append_line(format_theta_record(theta));
}

std::size_t ScalingTable::size() const {
  std::shared_lock lock(*mutex_);
  return entries_.size() + thetas_.size();
}

}  // namespace qrv
