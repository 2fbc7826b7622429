#include "pathfolio/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathfolio/strategies.hpp"
#include "pathfolio/universal.hpp"
#include "pathfolio/verify.hpp"

namespace pathfolio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Output

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += csv_field(table.columns[c]);
  }
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_number(row[c]);
    }
    out += "\r\n";
  }
  return out;
}

json table_json(const Table& table) {
  json rows = json::array();
  for (const auto& row : table.rows) rows.push_back(row);
  return json{{"columns", table.columns}, {"rows", std::move(rows)}};
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

class OutputDir {
 public:
  OutputDir(const RunConfig& config) : format_(config.format) {
    std::string dir = config.out;
    if (dir.empty()) {
      const char* env = std::getenv("PATHFOLIO_OUT");
      dir = env != nullptr && *env != '\0' ? env : "pathfolio-out";
    }
    root_ = dir;
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw ConfigError("out", "cannot create output directory '" + dir + "': " + ec.message());
  }

  void table(const std::string& stem, const Table& t) const {
    if (format_ == OutputFormat::Csv) {
      atomic_write(root_ / (stem + ".csv"), render_csv(t));
    } else {
      atomic_write(root_ / (stem + ".json"), table_json(t).dump(2) + "\n");
    }
  }

  void document(const std::string& name, const json& j) const { atomic_write(root_ / name, j.dump(2) + "\n"); }

 private:
  fs::path root_;
  OutputFormat format_;
};

// ---------------------------------------------------------------------------
// Spec parsing

std::map<std::string, std::string> key_values(const std::string& body, const std::string& key) {
  std::map<std::string, std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(key, "expected name=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double to_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (first == last || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError(key, "'" + text + "' is not a number");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& text, char sep, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(to_double(item, key));
  if (out.empty()) throw ConfigError(key, "expected at least one number");
  return out;
}

std::pair<std::string, std::string> split_kind(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

std::vector<std::string> asset_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("asset" + std::to_string(i + 1));
  return names;
}

struct StrategySpec {
  enum class Kind { Constant, Cppi, Universal } kind = Kind::Constant;
  std::vector<double> weights;  // empty = equal weight
  CppiParams cppi{0.8, 3.0, 0.0};
};

StrategySpec parse_strategy(const std::string& spec) {
  StrategySpec out;
  const auto [kind, body] = split_kind(spec);
  if (kind.empty() || kind == "equal") return out;
  if (kind == "constant") {
    out.weights = to_doubles(body, ',', "strategy");
    return out;
  }
  if (kind == "universal") {
    out.kind = StrategySpec::Kind::Universal;
    return out;
  }
  if (kind == "cppi") {
    out.kind = StrategySpec::Kind::Cppi;
    for (const auto& [k, v] : key_values(body, "strategy")) {
      if (k == "alpha") {
        out.cppi.floor_fraction = to_double(v, "strategy");
      } else if (k == "m") {
        out.cppi.multiplier = to_double(v, "strategy");
      } else if (k == "r") {
        out.cppi.rate = to_double(v, "strategy");
      } else {
        throw ConfigError("strategy", "unknown cppi option '" + k + "'");
      }
    }
    try {
      out.cppi.validate();
    } catch (const Error& e) {
      throw ConfigError("strategy", e.what());
    }
    return out;
  }
  throw ConfigError("strategy", "unknown strategy kind '" + kind + "'");
}

SimplexWeights constant_weights(const StrategySpec& spec, std::size_t d) {
  if (spec.kind != StrategySpec::Kind::Constant) throw ConfigError("strategy", "a constant strategy is required");
  if (spec.weights.empty()) return SimplexWeights::equal(d);
  if (spec.weights.size() != d) {
    throw ConfigError("strategy", std::to_string(spec.weights.size()) + " weights for " + std::to_string(d) +
                                      " assets");
  }
  try {
    return SimplexWeights(spec.weights);
  } catch (const Error& e) {
    throw ConfigError("strategy", e.what());
  }
}

Table prices_table(const MultiPath& s, const std::vector<std::string>& names) {
  Table t;
  t.columns.push_back("t");
  t.columns.insert(t.columns.end(), names.begin(), names.end());
  const GridSpec& grid = s.grid();
  const std::vector<double> times = grid_times(grid, grid.finest_level());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k]};
    for (std::size_t i = 0; i < s.dimension(); ++i) row.push_back(s.asset(i)[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table qv_table(const MultiPath& s, const std::vector<std::string>& names, int level) {
  Table t;
  t.columns.push_back("t");
  t.columns.insert(t.columns.end(), names.begin(), names.end());
  const MultiPath logs = s.log();
  std::vector<VariationPath> qv;
  for (std::size_t i = 0; i < s.dimension(); ++i) qv.push_back(quadratic_variation(logs.asset(i), level));
  const std::vector<double> times = grid_times(s.grid(), level);
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k]};
    for (const auto& q : qv) row.push_back(q.values[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table weights_table(const StrategyPath& pi, const std::vector<std::string>& names) {
  Table t;
  t.columns.push_back("t");
  t.columns.insert(t.columns.end(), names.begin(), names.end());
  const std::vector<double> times = grid_times(pi.grid(), pi.level());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k]};
    for (double w : pi.row(k)) row.push_back(w);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table series_table(const GridSpec& grid, int level, const std::vector<std::string>& names,
                   const std::vector<std::span<const double>>& columns) {
  Table t;
  t.columns.push_back("t");
  t.columns.insert(t.columns.end(), names.begin(), names.end());
  const std::vector<double> times = grid_times(grid, level);
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> row{times[k]};
    for (const auto& c : columns) row.push_back(c[k]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Error-to-exit-code mapping shared by every command.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "pathfolio: config error in " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "pathfolio: numeric failure (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    err << "pathfolio: output failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int simulate_constant(const RunConfig& config, const StrategySpec& spec) {
  std::vector<std::string> names;
  const MultiPath market = load_assets(config, &names);
  const int level = config.working_level();
  const SimplexWeights pi = constant_weights(spec, market.dimension());
  const StrategyPath strategy = StrategyPath::constant(market.grid(), level, pi);
  const SampledPath value = portfolio_value(strategy, market, level);
  const SharesPath shares = shares_from_weights(strategy, value.values(), market);

  const OutputDir out(config);
  out.table("prices", prices_table(market, names));
  out.table("value", series_table(market.grid(), level, {"value"}, {value.values()}));
  out.table("weights", weights_table(strategy, names));
  out.table("qv", qv_table(market, names, level));
  double min_value = value.front();
  for (double v : value.values()) min_value = std::min(min_value, v);
  out.document("summary.json", json{{"strategy", "constant"},
                                    {"weights", std::vector<double>(pi.values().begin(), pi.values().end())},
                                    {"level", level},
                                    {"final_value", value.back()},
                                    {"min_value", min_value},
                                    {"self_financing_residual", self_financing_residual(shares, market)}});
  return kExitOk;
}

int simulate_cppi(const RunConfig& config, const StrategySpec& spec) {
  std::vector<std::string> names;
  const MultiPath market = load_assets(config, &names);
  const int level = config.working_level();
  const CppiResult result = cppi(spec.cppi, market.asset(0), level);

  const std::size_t n = result.value.size();
  std::vector<double> floor_margin(n);
  for (std::size_t k = 0; k < n; ++k) {
    floor_margin[k] = result.value[k] - spec.cppi.floor_fraction * result.money_market[k];
  }
  double min_floor = floor_margin.front();
  for (double f : floor_margin) min_floor = std::min(min_floor, f);

  const OutputDir out(config);
  out.table("prices", prices_table(market, names));
  out.table("value", series_table(market.grid(), level, {"value", "money_market", "cushion", "floor_margin"},
                                  {result.value.values(), result.money_market.values(), result.cushion.values(),
                                   floor_margin}));
  out.table("weights", weights_table(result.weights, {names.front(), "money_market"}));
  out.table("qv", qv_table(market, names, level));
  out.document("summary.json",
               json{{"strategy", "cppi"},
                    {"risky_asset", names.front()},
                    {"alpha", spec.cppi.floor_fraction},
                    {"m", spec.cppi.multiplier},
                    {"r", spec.cppi.rate},
                    {"level", level},
                    {"final_value", result.value.back()},
                    {"min_floor_margin", min_floor},
                    {"leveraged_points", result.leveraged_indices.size()},
                    {"self_financing_residual", self_financing_residual(cppi_shares(result), result.market)}});
  return kExitOk;
}

json inequality_json(const InequalityReport& r) {
  json j{{"name", r.name}, {"min_margin", r.min_margin}, {"scale", r.scale}, {"pass", r.pass}};
  if (!r.note.empty()) j["note"] = r.note;
  if (r.cross_check_deviation) j["cross_check_deviation"] = *r.cross_check_deviation;
  return j;
}

json convergence_json(const ConvergenceReport& r) {
  return json{{"name", r.name},
              {"levels", r.levels},
              {"residuals", r.residuals},
              {"pass", r.monotone_decrease},
              {"monotone_decrease", r.monotone_decrease}};
}

}  // namespace

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon", "must be positive");
  if (finest_level < 1 || finest_level > GridSpec::kMaxLevel) {
    throw ConfigError("finest-level", "must lie in [1, " + std::to_string(GridSpec::kMaxLevel) + "]");
  }
  if (level < 0 || working_level() > finest_level) throw ConfigError("level", "must lie in [1, finest-level]");
  const auto [kind, body] = split_kind(assets);
  if (kind == "csv" && !fs::is_regular_file(body)) throw ConfigError("assets", "file '" + body + "' does not exist");
  if (measure.rfind("file:", 0) == 0 && !fs::is_regular_file(measure.substr(5))) {
    throw ConfigError("measure", "file '" + measure.substr(5) + "' does not exist");
  }
}

MultiPath load_assets(const RunConfig& config, std::vector<std::string>* names) {
  const GridSpec grid(config.horizon, config.finest_level);
  const auto [kind, body] = split_kind(config.assets);
  if (kind == "csv") {
    std::ifstream in(body, std::ios::binary);
    if (!in) throw ConfigError("assets", "cannot open '" + body + "'");
    CsvTable table;
    MultiPath market = ingest_csv(in, config.columns, grid, &table);
    if (names != nullptr) *names = table.column_names;
    return market;
  }
  const auto options = key_values(body, "assets");
  auto get = [&](const std::string& key, const std::string& fallback) {
    const auto it = options.find(key);
    return it == options.end() ? fallback : it->second;
  };
  const double d_value = to_double(get("d", "1"), "assets");
  if (d_value < 1 || d_value != std::floor(d_value) || d_value > 1000) {
    throw ConfigError("assets", "d must be a positive integer");
  }
  const auto d = static_cast<std::size_t>(d_value);
  if (names != nullptr) *names = asset_names(d);

  auto per_asset = [&](const std::string& key, const std::string& fallback) {
    std::vector<double> v = to_doubles(get(key, fallback), '/', "assets");
    if (v.size() == 1) v.assign(d, v.front());
    if (v.size() != d) throw ConfigError("assets", "'" + key + "' needs 1 or " + std::to_string(d) + " values");
    return v;
  };

  if (kind == "constant") {
    for (const auto& [k, _] : options) {
      if (k != "d" && k != "value") throw ConfigError("assets", "unknown option '" + k + "'");
    }
    const std::vector<double> value = per_asset("value", "1");
    std::vector<SampledPath> paths;
    for (std::size_t i = 0; i < d; ++i) {
      if (!(value[i] > 0.0)) throw ConfigError("assets", "constant prices must be positive");
      paths.emplace_back(grid, std::vector<double>(grid.points(grid.finest_level()), value[i]));
    }
    return MultiPath(grid, std::move(paths), true);
  }
  if (kind == "geometric") {
    for (const auto& [k, _] : options) {
      if (k != "d" && k != "sigma" && k != "drift" && k != "s0") {
        throw ConfigError("assets", "unknown option '" + k + "'");
      }
    }
    const std::vector<double> sigma = per_asset("sigma", "0.2");
    const std::vector<double> drift = per_asset("drift", "0");
    const std::vector<double> s0 = per_asset("s0", "100");
    std::vector<GeometricSpec> specs;
    for (std::size_t i = 0; i < d; ++i) {
      if (!(sigma[i] >= 0.0)) throw ConfigError("assets", "sigma must be nonnegative");
      if (!(s0[i] > 0.0)) throw ConfigError("assets", "s0 must be positive");
      specs.push_back({sigma[i], drift[i], s0[i], config.seed + i});
    }
    return geometric_market(grid, specs);
  }
  throw ConfigError("assets", "unknown asset kind '" + kind + "'");
}

int cmd_simulate(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const StrategySpec spec = parse_strategy(config.strategy);
    switch (spec.kind) {
      case StrategySpec::Kind::Constant: return simulate_constant(config, spec);
      case StrategySpec::Kind::Cppi: return simulate_cppi(config, spec);
      case StrategySpec::Kind::Universal: break;
    }
    throw ConfigError("strategy", "universal strategies run through the 'universal' subcommand");
  });
}

int cmd_cppi(const RunConfig& config, std::ostream& err) {
  RunConfig c = config;
  if (c.strategy.empty()) c.strategy = "cppi:alpha=0.8,m=3,r=0";
  return guarded(err, [&] {
    if (parse_strategy(c.strategy).kind != StrategySpec::Kind::Cppi) {
      throw ConfigError("strategy", "the cppi subcommand needs a cppi:... strategy");
    }
    return cmd_simulate(c, err);
  });
}

namespace {

// Same family at half the atoms (dirichlet) or half the resolution (grid).
// File measures have no coarser sibling.
std::optional<std::string> coarser_measure_spec(const std::string& spec) {
  const auto [kind, body] = split_kind(spec);
  const char* key = kind == "dirichlet" ? "k" : kind == "grid" ? "resolution" : nullptr;
  if (key == nullptr) return std::nullopt;
  auto options = key_values(body, "measure");
  const auto it = options.find(key);
  const std::uint64_t full = it == options.end() ? (kind == "dirichlet" ? 500 : 50) : std::stoull(it->second);
  if (full < 2) return std::nullopt;
  options[key] = std::to_string(full / 2);
  std::string out = kind + ":";
  for (const auto& [k, v] : options) out += (out.back() == ':' ? "" : ",") + k + "=" + v;
  return out;
}

}  // namespace

int cmd_universal(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    if (!config.strategy.empty() && parse_strategy(config.strategy).kind != StrategySpec::Kind::Universal) {
      throw ConfigError("strategy", "the universal subcommand takes strategy 'universal'");
    }
    std::vector<std::string> names;
    const MultiPath market = load_assets(config, &names);
    const int level = config.working_level();
    DiscreteSimplexMeasure mu = [&] {
      try {
        return parse_measure_spec(config.measure, market.dimension());
      } catch (const Error& e) {
        throw ConfigError("measure", e.what());
      }
    }();
    const UniversalResult result = universal_portfolio(mu, market, level);
    const double residual = universal_consistency_residual(result, market, level);

    json sensitivity = nullptr;
    if (const auto coarse = coarser_measure_spec(config.measure)) {
      const double v = universal_portfolio(parse_measure_spec(*coarse, market.dimension()), market, level).v_hat.back();
      sensitivity = json{{"measure", *coarse},
                         {"v_hat_final", v},
                         {"relative_difference", std::fabs(v - result.v_hat.back()) / result.v_hat.back()}};
    }

    Table atoms;
    atoms.columns.push_back("atom");
    atoms.columns.push_back("weight");
    for (const auto& name : names) atoms.columns.push_back("pi_" + name);
    atoms.columns.push_back("final_value");
    for (std::size_t a = 0; a < mu.size(); ++a) {
      std::vector<double> row{static_cast<double>(a), mu.atoms()[a].weight};
      for (double w : mu.atoms()[a].point.values()) row.push_back(w);
      row.push_back(result.atom_values[a].back());
      atoms.rows.push_back(std::move(row));
    }

    const OutputDir out(config);
    out.table("prices", prices_table(market, names));
    out.table("v_hat", series_table(market.grid(), level, {"v_hat"}, {result.v_hat.values()}));
    out.table("pi_hat", weights_table(result.pi_hat, names));
    out.table("atoms", atoms);
    out.document("report.json", json{{"measure", config.measure},
                                     {"atoms", mu.size()},
                                     {"level", level},
                                     {"v_hat_final", result.v_hat.back()},
                                     {"consistency_residual", residual},
                                     {"sensitivity", sensitivity}});
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const MultiPath market = load_assets(config);
    const SimplexWeights pi = constant_weights(parse_strategy(config.strategy), market.dimension());
    try {
      validate_levels(config.levels, market.grid().finest_level());
    } catch (const Error& e) {
      throw ConfigError("levels", e.what());
    }
    VerifyOptions options;
    options.corrupt_qv = config.inject_fault;
    const int level = config.working_level();
    const VerificationRun run = run_verification(market, pi, level, config.levels, options);

    const OutputDir out(config);
    json inequalities = json::array();
    for (const auto& r : run.inequalities) {
      inequalities.push_back(inequality_json(r));
      Table margins;
      margins.columns = {"t", "lhs", "rhs", "margin"};
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        margins.rows.push_back({r.times[k], r.lhs[k], r.rhs[k], r.margins[k]});
      }
      out.table("margins_" + r.name, margins);
    }
    json convergence = json::array();
    for (const auto& r : run.convergence) convergence.push_back(convergence_json(r));
    const bool pass = run.passed();
    out.document("report.json", json{{"pass", pass},
                                     {"level", level},
                                     {"weights", std::vector<double>(pi.values().begin(), pi.values().end())},
                                     {"inequalities", std::move(inequalities)},
                                     {"convergence", std::move(convergence)},
                                     {"asymptotic_growth", "not evaluated"}});
    if (!pass) err << "pathfolio: verification failed; see report.json\n";
    return pass ? kExitOk : kExitCheckFailed;
  });
}

int cmd_ingest(const RunConfig& config, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    if (split_kind(config.assets).first != "csv") throw ConfigError("assets", "ingest needs a csv:<path> asset spec");
    std::vector<std::string> names;
    const MultiPath market = load_assets(config, &names);
    const OutputDir out(config);
    out.table("prices", prices_table(market, names));
    out.table("qv", qv_table(market, names, config.working_level()));
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("levels", "'" + item + "' is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// key=value lines become "--key value" pairs placed ahead of the real
// arguments, so command-line flags win.
std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config", "line '" + line + "' is not key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key == "config") throw ConfigError("config", "config files cannot nest");
    out.push_back("--" + key);
    out.push_back(trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);

  // Splice config file contents in right after the subcommand name.
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      std::size_t consumed = 0;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        consumed = 2;
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        consumed = 1;
      }
      if (consumed == 0) continue;
      const std::vector<std::string> extra = config_file_args(path);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
      const std::size_t at = args.empty() || args.front().rfind("-", 0) == 0 ? 0 : 1;
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
      break;
    }
  } catch (const ConfigError& e) {
    err << "pathfolio: config error in " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"Pathwise Itô calculus and portfolio strategy toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig config;
  std::string format = "csv";
  std::string levels;
  std::string columns;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--horizon", config.horizon, "Horizon T");
    sub->add_option("--finest-level", config.finest_level, "Finest dyadic level N");
    sub->add_option("--level", config.level, "Working level n (default N)");
    sub->add_option("--seed", config.seed, "Seed for synthetic paths");
    sub->add_option("--assets", config.assets, "geometric:..., constant:... or csv:<path>");
    sub->add_option("--columns", columns, "Comma-separated CSV columns to ingest");
    sub->add_option("--strategy", config.strategy, "equal | constant:w1,... | cppi:alpha=,m=,r= | universal");
    sub->add_option("--measure", config.measure, "dirichlet:k=,seed= | grid:resolution= | file:<path>");
    sub->add_option("--out", config.out, "Output directory (default $PATHFOLIO_OUT)");
    sub->add_option("--format", format, "csv | json");
    sub->add_option("--levels", levels, "Comma-separated increasing levels for verify");
    sub->add_flag("--inject-fault", config.inject_fault)->group("");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate a constant or CPPI strategy");
  CLI::App* cppi_cmd = app.add_subcommand("cppi", "Simulate CPPI (simulate with a cppi strategy)");
  CLI::App* universal = app.add_subcommand("universal", "Build a universal portfolio");
  CLI::App* verify = app.add_subcommand("verify", "Check inequalities and convergence");
  CLI::App* ingest = app.add_subcommand("ingest", "Resample a CSV price table onto the dyadic grid");
  for (CLI::App* sub : {simulate, cppi_cmd, universal, verify, ingest}) add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pathfolio: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (format == "csv") {
      config.format = OutputFormat::Csv;
    } else if (format == "json") {
      config.format = OutputFormat::Json;
    } else {
      throw ConfigError("format", "must be csv or json");
    }
    if (!levels.empty()) config.levels = parse_levels(levels);
    if (!columns.empty()) config.columns = split_list(columns);
  } catch (const ConfigError& e) {
    err << "pathfolio: config error in " << e.what() << "\n";
    return kExitConfig;
  }

  if (simulate->parsed()) return cmd_simulate(config, err);
  if (cppi_cmd->parsed()) return cmd_cppi(config, err);
  if (universal->parsed()) return cmd_universal(config, err);
  if (verify->parsed()) return cmd_verify(config, err);
  return cmd_ingest(config, err);
}

}  // namespace pathfolio::cli
