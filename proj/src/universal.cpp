#include "pathfolio/universal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "pathfolio/summation.hpp"

namespace pathfolio {

DiscreteSimplexMeasure::DiscreteSimplexMeasure(std::vector<SimplexAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw Error(ErrorCode::EmptyMeasure, "measure has no atoms");
  const std::size_t d = atoms_.front().point.dimension();
  CompensatedSum total;
  for (const auto& atom : atoms_) {
    if (atom.point.dimension() != d) throw Error(ErrorCode::DimensionMismatch, "measure atoms differ in dimension");
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw Error(ErrorCode::InvalidArgument, "measure weights must be positive");
    }
    total.add(atom.weight);
  }
  if (std::fabs(total.value() - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::InvalidArgument, "measure weights sum to " + std::to_string(total.value()));
  }
}

namespace {

SimplexWeights normalized(std::vector<double> x) {
  CompensatedSum sum;
  for (double v : x) sum.add(v);
  const double total = sum.value();
  for (double& v : x) v /= total;
  return SimplexWeights(std::move(x));
}

}  // namespace

DiscreteSimplexMeasure measure_uniform_dirichlet(std::size_t d, std::size_t k, std::uint64_t seed) {
  if (d == 0 || k == 0) throw Error(ErrorCode::InvalidArgument, "Dirichlet measure needs d >= 1 and k >= 1");
  std::mt19937_64 engine(seed);
  std::vector<SimplexAtom> atoms;
  atoms.reserve(k);
  const double weight = 1.0 / static_cast<double>(k);
  std::vector<double> e(d);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t i = 0; i < d; ++i) {
      const double u = std::ldexp(static_cast<double>(engine() >> 11), -53);
      e[i] = -std::log1p(-u);
    }
    atoms.push_back({normalized(e), weight});
  }
  return DiscreteSimplexMeasure(std::move(atoms));
}

namespace {

std::size_t composition_count(std::size_t d, std::size_t resolution, std::size_t cap) {
  // C(resolution + d - 1, d - 1), stopping once the cap is exceeded.
  long double count = 1.0L;
  for (std::size_t j = 1; j < d; ++j) {
    count = count * static_cast<long double>(resolution + j) / static_cast<long double>(j);
    if (count > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(count));
}

void enumerate(std::size_t d, std::size_t remaining, std::vector<std::size_t>& parts,
               std::vector<std::vector<std::size_t>>& out) {
  if (parts.size() + 1 == d) {
    parts.push_back(remaining);
    out.push_back(parts);
    parts.pop_back();
    return;
  }
  for (std::size_t c = 0; c <= remaining; ++c) {
    parts.push_back(c);
    enumerate(d, remaining - c, parts, out);
    parts.pop_back();
  }
}

}  // namespace

DiscreteSimplexMeasure measure_grid(std::size_t d, std::size_t resolution, std::size_t atom_cap) {
  if (d == 0 || resolution == 0) throw Error(ErrorCode::InvalidArgument, "grid measure needs d >= 1, resolution >= 1");
  const std::size_t count = composition_count(d, resolution, atom_cap);
  if (count > atom_cap) {
    throw Error(ErrorCode::MeasureTooLarge, "grid measure would exceed " + std::to_string(atom_cap) + " atoms");
  }
  std::vector<std::vector<std::size_t>> compositions;
  compositions.reserve(count);
  std::vector<std::size_t> parts;
  enumerate(d, resolution, parts, compositions);

  const double weight = 1.0 / static_cast<double>(compositions.size());
  std::vector<SimplexAtom> atoms;
  atoms.reserve(compositions.size());
  for (const auto& c : compositions) {
    std::vector<double> w(d);
    for (std::size_t i = 0; i < d; ++i) w[i] = static_cast<double>(c[i]) / static_cast<double>(resolution);
    atoms.push_back({normalized(std::move(w)), weight});
  }
  return DiscreteSimplexMeasure(std::move(atoms));
}

DiscreteSimplexMeasure measure_from_csv(std::istream& in) {
  std::vector<double> weights;
  std::vector<std::vector<double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      double v = 0.0;
      const char* first = field.data() + (b == std::string::npos ? field.size() : b);
      const char* last = field.data() + (e == std::string::npos ? field.size() : e + 1);
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (first == last || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw Error(ErrorCode::UnparsableRow, "measure file line " + std::to_string(line_no) + ": bad number");
      }
      row.push_back(v);
    }
    if (row.size() < 2) {
      throw Error(ErrorCode::UnparsableRow, "measure file line " + std::to_string(line_no) + ": need w,pi...");
    }
    if (!points.empty() && row.size() - 1 != points.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, "measure file line " + std::to_string(line_no) + ": dimension");
    }
    weights.push_back(row.front());
    points.emplace_back(row.begin() + 1, row.end());
  }
  if (weights.empty()) throw Error(ErrorCode::EmptyMeasure, "measure file has no atoms");

  CompensatedSum total;
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "measure file weights must be positive");
    total.add(w);
  }
  std::vector<SimplexAtom> atoms;
  atoms.reserve(weights.size());
  for (std::size_t a = 0; a < weights.size(); ++a) {
    CompensatedSum sum;
    for (double v : points[a]) {
      if (v < 0.0) throw Error(ErrorCode::NegativeWeight, "measure atom has a negative component");
      sum.add(v);
    }
    if (std::fabs(sum.value() - 1.0) > 1e-9) {
      throw Error(ErrorCode::InvalidArgument, "measure atom " + std::to_string(a + 1) + " is not in the simplex");
    }
    atoms.push_back({normalized(points[a]), weights[a] / total.value()});
  }
  // Renormalized weights can drift by a few ulps; fold the remainder into the last atom.
  CompensatedSum check;
  for (const auto& atom : atoms) check.add(atom.weight);
  atoms.back().weight += 1.0 - check.value();
  return DiscreteSimplexMeasure(std::move(atoms));
}

namespace {

std::map<std::string, std::string> parse_options(const std::string& body, const std::string& kind) {
  std::map<std::string, std::string> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "measure option '" + item + "' for " + kind + " lacks '='");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::InvalidArgument, "measure option '" + key + "' is not a nonnegative integer");
  }
  return out;
}

}  // namespace

DiscreteSimplexMeasure parse_measure_spec(const std::string& spec, std::size_t d) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  if (kind == "file") {
    std::ifstream in(body);
    if (!in) throw Error(ErrorCode::Io, "cannot open measure file '" + body + "'");
    DiscreteSimplexMeasure mu = measure_from_csv(in);
    if (mu.dimension() != d) {
      throw Error(ErrorCode::DimensionMismatch, "measure file dimension " + std::to_string(mu.dimension()) +
                                                    " does not match " + std::to_string(d) + " assets");
    }
    return mu;
  }
  const auto options = parse_options(body, kind);
  auto get = [&](const std::string& key, std::uint64_t fallback) {
    const auto it = options.find(key);
    return it == options.end() ? fallback : parse_unsigned(key, it->second);
  };
  if (kind == "dirichlet") {
    for (const auto& [key, _] : options) {
      if (key != "k" && key != "seed") throw Error(ErrorCode::InvalidArgument, "unknown measure option '" + key + "'");
    }
    return measure_uniform_dirichlet(d, get("k", 500), get("seed", 7));
  }
  if (kind == "grid") {
    for (const auto& [key, _] : options) {
      if (key != "resolution") throw Error(ErrorCode::InvalidArgument, "unknown measure option '" + key + "'");
    }
    return measure_grid(d, get("resolution", 50));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown measure kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

UniversalResult universal_portfolio(const DiscreteSimplexMeasure& mu, const MultiPath& s, int level) {
  if (mu.size() == 0) throw Error(ErrorCode::EmptyMeasure, "measure has no atoms");
  if (mu.dimension() != s.dimension()) throw Error(ErrorCode::DimensionMismatch, "measure/market dimension");
  const ConstantRebalancedBasis basis(s, level);
  const std::size_t n = basis.points();
  const std::size_t d = basis.dimension();
  const GridSpec coarse = s.grid().coarsened(level);

  std::vector<SampledPath> atom_values;
  atom_values.reserve(mu.size());
  for (const auto& atom : mu.atoms()) atom_values.emplace_back(coarse, basis.value(atom.point));

  std::vector<double> v_hat(n), pi_hat(n * d);
  std::vector<CompensatedSum> numer(d);
  for (std::size_t k = 0; k < n; ++k) {
    CompensatedSum total;
    for (auto& acc : numer) acc = CompensatedSum();
    for (std::size_t a = 0; a < mu.size(); ++a) {
      const auto& atom = mu.atoms()[a];
      const double wv = atom.weight * atom_values[a][k];
      total.add(wv);
      for (std::size_t i = 0; i < d; ++i) numer[i].add(atom.point[i] * wv);
    }
    v_hat[k] = total.value();
    for (std::size_t i = 0; i < d; ++i) pi_hat[k * d + i] = numer[i].value() / v_hat[k];
  }
  return UniversalResult{SampledPath(coarse, std::move(v_hat)),
                         StrategyPath(s.grid(), level, d, std::move(pi_hat), WeightMode::Simplex),
                         std::move(atom_values)};
}

double universal_consistency_residual(const UniversalResult& result, const MultiPath& s, int level) {
  if (result.pi_hat.level() != level) {
    throw Error(ErrorCode::LevelOutOfRange, "universal result was built at a different level");
  }
  const SampledPath v = portfolio_value(result.pi_hat, s, level);
  double residual = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    residual = std::max(residual, std::fabs(v[k] - result.v_hat[k]) / result.v_hat[k]);
  }
  return residual;
}

}  // namespace pathfolio
