#include "pathfolio/paths.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string_view>

#include "pathfolio/summation.hpp"

namespace pathfolio {

namespace {

std::string describe_level(int level, int finest) {
  std::ostringstream os;
  os << "level " << level << " outside [1, " << finest << "]";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(double horizon, int finest_level) : horizon_(horizon), finest_level_(finest_level) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidGrid, "grid horizon must be positive and finite");
  }
  if (finest_level < 1 || finest_level > kMaxLevel) {
    throw Error(ErrorCode::InvalidGrid, "finest level must lie in [1, " + std::to_string(kMaxLevel) + "]");
  }
}

void GridSpec::check_level(int level) const {
  if (level < 1 || level > finest_level_) {
    throw Error(ErrorCode::LevelOutOfRange, describe_level(level, finest_level_));
  }
}

std::size_t GridSpec::intervals(int level) const {
  check_level(level);
  return std::size_t{1} << level;
}

std::size_t GridSpec::stride(int level) const {
  check_level(level);
  return std::size_t{1} << (finest_level_ - level);
}

double GridSpec::time(int level, std::size_t k) const {
  // k * T is rounded once; the power-of-two scaling is exact.
  return std::ldexp(static_cast<double>(k) * horizon_, -level);
}

double GridSpec::step(int level) const { return std::ldexp(horizon_, -level); }

GridSpec GridSpec::coarsened(int level) const {
  check_level(level);
  return GridSpec(horizon_, level);
}

std::vector<double> grid_times(const GridSpec& grid, int level) {
  const std::size_t n = grid.points(level);
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = grid.time(level, k);
  times.back() = grid.horizon();
  return times;
}

// ---------------------------------------------------------------------------
// SampledPath / MultiPath

SampledPath::SampledPath(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points(grid_.finest_level())) {
    throw Error(ErrorCode::InvalidPath, "path length " + std::to_string(values_.size()) +
                                            " does not match 2^N + 1 = " +
                                            std::to_string(grid_.points(grid_.finest_level())));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidPath, "path contains a non-finite value");
  }
}

std::vector<double> SampledPath::at_level(int level) const {
  const std::size_t stride = grid_.stride(level);
  const std::size_t n = grid_.points(level);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = values_[k * stride];
  return out;
}

SampledPath SampledPath::coarsened(int level) const {
  return SampledPath(grid_.coarsened(level), at_level(level));
}

MultiPath::MultiPath(GridSpec grid, std::vector<SampledPath> assets, bool positive)
    : grid_(grid), assets_(std::move(assets)), positive_(positive) {
  for (const auto& a : assets_) {
    if (!(a.grid() == grid_)) throw Error(ErrorCode::GridMismatch, "assets do not share one grid");
    if (positive_) {
      for (double v : a.values()) {
        if (!(v > 0.0)) throw Error(ErrorCode::NonpositiveValue, "price path contains a nonpositive value");
      }
    }
  }
}

namespace {
GridSpec first_grid(const std::vector<SampledPath>& assets) {
  if (assets.empty()) throw Error(ErrorCode::DimensionMismatch, "a multi-path needs at least one asset");
  return assets.front().grid();
}
}  // namespace

MultiPath::MultiPath(std::vector<SampledPath> assets, bool positive)
    // copy, not move: argument evaluation order is unspecified
    : MultiPath(first_grid(assets), assets, positive) {}

MultiPath MultiPath::coarsened(int level) const {
  std::vector<SampledPath> out;
  out.reserve(assets_.size());
  for (const auto& a : assets_) out.push_back(a.coarsened(level));
  return MultiPath(grid_.coarsened(level), std::move(out), positive_);
}

MultiPath MultiPath::log() const {
  if (!positive_) throw Error(ErrorCode::NonpositiveValue, "log of a path without the positivity flag");
  std::vector<SampledPath> out;
  out.reserve(assets_.size());
  for (const auto& a : assets_) {
    std::vector<double> v(a.values().begin(), a.values().end());
    for (double& x : v) x = std::log(x);
    out.emplace_back(grid_, std::move(v));
  }
  return MultiPath(grid_, std::move(out), false);
}

// ---------------------------------------------------------------------------
// Variation

VariationPath quadratic_variation(const SampledPath& path, int level) {
  return covariation(path, path, level);
}

VariationPath covariation(const SampledPath& x, const SampledPath& y, int level) {
  if (!(x.grid() == y.grid())) throw Error(ErrorCode::GridMismatch, "covariation of paths on different grids");
  const GridSpec& grid = x.grid();
  const std::size_t stride = grid.stride(level);
  const std::size_t n = grid.points(level);
  const auto xv = x.values();
  const auto yv = y.values();

  VariationPath out{grid, level, std::vector<double>(n, 0.0)};
  CompensatedSum acc;
  for (std::size_t k = 1; k < n; ++k) {
    const double dx = xv[k * stride] - xv[(k - 1) * stride];
    const double dy = yv[k * stride] - yv[(k - 1) * stride];
    acc.add(dx * dy);
    out.values[k] = acc.value();
  }
  return out;
}

std::vector<double> covariation_matrices(const MultiPath& paths, int level) {
  const GridSpec& grid = paths.grid();
  const std::size_t stride = grid.stride(level);
  const std::size_t n = grid.points(level);
  const std::size_t d = paths.dimension();

  std::vector<double> out(n * d * d, 0.0);
  std::vector<CompensatedSum> acc(d * d);
  std::vector<double> inc(d);
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto v = paths.asset(i).values();
      inc[i] = v[k * stride] - v[(k - 1) * stride];
    }
    double* row = out.data() + k * d * d;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        acc[i * d + j].add(inc[i] * inc[j]);
        row[i * d + j] = acc[i * d + j].value();
        row[j * d + i] = row[i * d + j];
      }
    }
  }
  return out;
}

std::vector<double> covariation_matrix(const MultiPath& paths, int level, std::size_t t_index) {
  const std::size_t n = paths.grid().points(level);
  if (t_index >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "time index " + std::to_string(t_index) + " outside level grid of " + std::to_string(n));
  }
  const std::size_t d = paths.dimension();
  const std::size_t stride = paths.grid().stride(level);
  std::vector<CompensatedSum> acc(d * d);
  std::vector<double> inc(d);
  for (std::size_t k = 1; k <= t_index; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto v = paths.asset(i).values();
      inc[i] = v[k * stride] - v[(k - 1) * stride];
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) acc[i * d + j].add(inc[i] * inc[j]);
    }
  }
  std::vector<double> c(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) c[i * d + j] = c[j * d + i] = acc[i * d + j].value();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Synthetic paths

SampledPath generate_walk(const GridSpec& grid, std::uint64_t seed, double sigma, double drift) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma) || !std::isfinite(drift)) {
    throw Error(ErrorCode::InvalidArgument, "walk needs finite sigma >= 0 and finite drift");
  }
  const int level = grid.finest_level();
  const std::size_t n = grid.points(level);
  const double dt = grid.step(level);
  const double jump = sigma * std::sqrt(dt);
  const double trend = drift * dt;

  std::mt19937_64 engine(seed);
  std::vector<double> values(n);
  values[0] = 0.0;
  CompensatedSum acc;
  for (std::size_t k = 1; k < n; ++k) {
    const double eps = (engine() >> 63) != 0 ? 1.0 : -1.0;
    acc.add(trend + jump * eps);
    values[k] = acc.value();
  }
  return SampledPath(grid, std::move(values));
}

SampledPath generate_geometric(const GridSpec& grid, std::uint64_t seed, double sigma, double drift,
                               double s0) {
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw Error(ErrorCode::InvalidArgument, "s0 must be positive");
  const SampledPath w = generate_walk(grid, seed, sigma, drift);
  std::vector<double> values(w.values().begin(), w.values().end());
  for (double& v : values) v = s0 * std::exp(v);
  return SampledPath(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC 4180 fields on a single physical line.
bool split_csv_line(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return false;
  fields.push_back(was_quoted ? cur : std::string(trim(cur)));
  return true;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_iso8601(std::string_view s, double& seconds) {
  // YYYY-MM-DD[(T| )HH:MM[:SS[.frac]]][Z]
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0, mo = 0, d = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d)) {
    return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  double secs = static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count()) * 86400.0;
  std::string_view rest = s.substr(10);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') return false;
    rest.remove_prefix(1);
    if (rest.size() < 5 || rest[2] != ':') return false;
    int hh = 0, mm = 0;
    if (!parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm)) return false;
    if (hh > 23 || mm > 59) return false;
    secs += hh * 3600.0 + mm * 60.0;
    rest.remove_prefix(5);
    if (!rest.empty()) {
      if (rest.front() != ':') return false;
      rest.remove_prefix(1);
      double ss = 0.0;
      if (!parse_double(rest, ss) || ss < 0.0 || ss >= 61.0) return false;
      secs += ss;
    }
  }
  seconds = secs;
  return true;
}

}  // namespace

double parse_time_field(std::string_view field) {
  field = trim(field);
  double value = 0.0;
  if (parse_double(field, value)) return value;
  if (parse_iso8601(field, value)) return value;
  throw Error(ErrorCode::UnparsableRow, "cannot parse time field '" + std::string(field) + "'");
}

MultiPath ingest_csv(std::istream& source, const std::vector<std::string>& column_names, const GridSpec& grid,
                     CsvTable* table) {
  std::string line;
  std::vector<std::string> fields;

  // Header.
  bool have_header = false;
  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    if (!split_csv_line(line, fields)) throw Error(ErrorCode::UnparsableRow, "malformed CSV header");
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorCode::TooFewRows, "CSV input is empty");
  const std::vector<std::string> header = fields;
  if (header.size() < 2) throw Error(ErrorCode::MissingColumn, "CSV needs a time column and a price column");

  std::vector<std::size_t> selected;
  std::vector<std::string> names;
  if (column_names.empty()) {
    for (std::size_t c = 1; c < header.size(); ++c) {
      selected.push_back(c);
      names.push_back(header[c]);
    }
  } else {
    for (const auto& name : column_names) {
      const auto it = std::find(header.begin() + 1, header.end(), name);
      if (it == header.end()) throw Error(ErrorCode::MissingColumn, "CSV has no column '" + name + "'");
      selected.push_back(static_cast<std::size_t>(it - header.begin()));
      names.push_back(name);
    }
  }

  std::vector<double> times;
  std::vector<std::vector<double>> prices(selected.size());
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "CSV line " + std::to_string(line_no);
    if (!split_csv_line(line, fields) || fields.size() != header.size()) {
      throw Error(ErrorCode::UnparsableRow, where + ": expected " + std::to_string(header.size()) + " fields");
    }
    double t = 0.0;
    try {
      t = parse_time_field(fields[0]);
    } catch (const Error&) {
      throw Error(ErrorCode::UnparsableRow, where + ": cannot parse time '" + fields[0] + "'");
    }
    if (!times.empty() && !(t > times.back())) {
      throw Error(ErrorCode::NonincreasingTime, where + ": times must be strictly increasing");
    }
    times.push_back(t);
    for (std::size_t c = 0; c < selected.size(); ++c) {
      double p = 0.0;
      if (!parse_double(fields[selected[c]], p)) {
        throw Error(ErrorCode::UnparsableRow, where + ": cannot parse price '" + fields[selected[c]] + "'");
      }
      if (!(p > 0.0)) {
        throw Error(ErrorCode::NonpositivePrice, where + ": nonpositive price in column '" + names[c] + "'");
      }
      prices[c].push_back(p);
    }
  }
  if (times.size() < 2) throw Error(ErrorCode::TooFewRows, "CSV needs at least 2 data rows");

  // Left-constant resampling in units of finest-grid steps; a small slack
  // keeps rows written at grid times on their own grid point.
  const int level = grid.finest_level();
  const std::size_t n = grid.points(level);
  const double span = times.back() - times.front();
  const double scale = static_cast<double>(grid.intervals(level));
  std::vector<double> position(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) position[j] = (times[j] - times.front()) / span * scale;

  std::vector<SampledPath> assets;
  assets.reserve(selected.size());
  std::vector<std::size_t> row_at(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = static_cast<double>(k) + 1e-9;
    while (j + 1 < times.size() && position[j + 1] <= target) ++j;
    row_at[k] = j;
  }
  for (std::size_t c = 0; c < selected.size(); ++c) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = prices[c][row_at[k]];
    assets.emplace_back(grid, std::move(v));
  }
  if (table != nullptr) {
    table->column_names = names;
    table->times = times;
  }
  return MultiPath(grid, std::move(assets), true);
}

}  // namespace pathfolio
