#include "pathfolio/verify.hpp"

#include <algorithm>
#include <cmath>

#include "pathfolio/calculus.hpp"
#include "pathfolio/summation.hpp"
#include "pathfolio/universal.hpp"

namespace pathfolio {

namespace {

// Covariation matrix at level-n time k, optionally corrupted for fault injection.
std::vector<double> gram_at(const ConstantRebalancedBasis& basis, std::size_t k, const VerifyOptions& options) {
  const auto c = basis.covariation(k);
  std::vector<double> out(c.begin(), c.end());
  if (options.corrupt_qv) {
    const std::size_t d = basis.dimension();
    double diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) diag = std::max(diag, out[i * d + i]);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (i != j) out[i * d + j] += 2.0 * diag;
      }
    }
  }
  return out;
}

double weighted_diagonal(const SimplexWeights& pi, std::span<const double> c) {
  const std::size_t d = pi.dimension();
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) acc.add(pi[i] * c[i * d + i]);
  return acc.value();
}

double quadratic_form(const SimplexWeights& pi, std::span<const double> c) {
  const std::size_t d = pi.dimension();
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) acc.add(pi[i] * pi[j] * c[i * d + j]);
  }
  return acc.value();
}

// sum_i pi_i c_ii - pi^T C pi in a single compensated sum.
double diversification(const SimplexWeights& pi, std::span<const double> c) {
  const std::size_t d = pi.dimension();
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) {
    acc.add(pi[i] * c[i * d + i]);
    for (std::size_t j = 0; j < d; ++j) acc.add(-pi[i] * pi[j] * c[i * d + j]);
  }
  return acc.value();
}

void finalize(InequalityReport& report) {
  report.min_margin = report.margins.empty() ? 0.0 : report.margins.front();
  report.scale = 1.0;
  for (std::size_t k = 0; k < report.margins.size(); ++k) {
    report.min_margin = std::min(report.min_margin, report.margins[k]);
    report.scale = std::max({report.scale, std::fabs(report.lhs[k]), std::fabs(report.rhs[k])});
  }
  report.pass = report.min_margin >= -kMarginTolerance * report.scale;
}

void require_dimension(const SimplexWeights& pi, const MultiPath& s) {
  if (pi.dimension() != s.dimension()) throw Error(ErrorCode::DimensionMismatch, "weights/market dimension");
}

}  // namespace

InequalityReport check_geometric_mean_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                            const VerifyOptions& options) {
  require_dimension(pi, s);
  const ConstantRebalancedBasis basis(s, level);
  InequalityReport report;
  report.name = "geometric_mean_bound";
  for (std::size_t k = 0; k < basis.points(); ++k) {
    const auto c = gram_at(basis, k, options);
    const double rhs = basis.weighted_log_ratio(pi, k);
    const double excess = 0.5 * diversification(pi, c);
    report.times.push_back(s.grid().time(level, k));
    report.lhs.push_back(rhs + excess);  // log V^pi_t
    report.rhs.push_back(rhs);
    report.margins.push_back(excess);
  }
  finalize(report);
  return report;
}

InequalityReport check_growth_rate(const SimplexWeights& pi, const MultiPath& s, int level,
                                   const VerifyOptions& options) {
  const InequalityReport base = check_geometric_mean_bound(pi, s, level, options);
  InequalityReport report;
  report.name = "growth_rate";
  report.note = "asymptotic limsup/liminf statements: not evaluated";
  for (std::size_t k = 1; k < base.times.size(); ++k) {
    const double t = base.times[k];
    report.times.push_back(t);
    report.lhs.push_back(base.lhs[k] / t);
    report.rhs.push_back(base.rhs[k] / t);
    report.margins.push_back(base.margins[k] / t);
  }
  finalize(report);
  return report;
}

InequalityReport check_variance_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                      const VerifyOptions& options) {
  require_dimension(pi, s);
  const ConstantRebalancedBasis basis(s, level);
  InequalityReport report;
  report.name = "variance_bound";
  for (std::size_t k = 0; k < basis.points(); ++k) {
    const auto c = gram_at(basis, k, options);
    report.times.push_back(s.grid().time(level, k));
    report.lhs.push_back(quadratic_form(pi, c));
    report.rhs.push_back(weighted_diagonal(pi, c));
    report.margins.push_back(diversification(pi, c));
  }
  finalize(report);

  // Path-level cross-check: QV of the sampled log V^pi against pi^T C pi.
  const SampledPath log_value(s.grid().coarsened(level), basis.log_value(pi));
  const VariationPath qv = quadratic_variation(log_value, level);
  double deviation = 0.0;
  for (std::size_t k = 0; k < basis.points(); ++k) {
    deviation = std::max(deviation, std::fabs(qv.values[k] - basis.quadratic_form(pi, k)));
  }
  report.cross_check_deviation = deviation;
  return report;
}

InequalityReport check_volatility_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                        const VerifyOptions& options) {
  require_dimension(pi, s);
  const ConstantRebalancedBasis basis(s, level);
  const std::size_t d = pi.dimension();
  InequalityReport report;
  report.name = "volatility_bound";
  for (std::size_t k = 0; k < basis.points(); ++k) {
    const auto c = gram_at(basis, k, options);
    CompensatedSum rhs;
    for (std::size_t i = 0; i < d; ++i) rhs.add(pi[i] * std::sqrt(c[i * d + i]));
    const double lhs = std::sqrt(std::max(0.0, quadratic_form(pi, c)));
    report.times.push_back(s.grid().time(level, k));
    report.lhs.push_back(lhs);
    report.rhs.push_back(rhs.value());
    report.margins.push_back(rhs.value() - lhs);
  }
  finalize(report);
  return report;
}

bool is_monotone_decrease(std::span<const double> residuals) {
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    if (!std::isfinite(residuals[i])) return false;
    if (residuals[i] < residuals[i - 1]) continue;
    if (residuals[i] <= kResidualFloor) continue;
    return false;
  }
  return true;
}

void validate_levels(std::span<const int> levels, int finest_level) {
  if (levels.empty()) throw Error(ErrorCode::InvalidLevels, "no levels given");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1 || levels[i] > finest_level) {
      throw Error(ErrorCode::InvalidLevels, "level " + std::to_string(levels[i]) + " outside [1, " +
                                                std::to_string(finest_level) + "]");
    }
    if (i > 0 && levels[i] <= levels[i - 1]) throw Error(ErrorCode::InvalidLevels, "levels must increase");
  }
}

std::vector<ConvergenceReport> convergence_suite(const MultiPath& s, std::span<const int> levels) {
  validate_levels(levels, s.grid().finest_level());
  if (!s.positive()) throw Error(ErrorCode::NonpositiveValue, "convergence suite needs a price market");

  const MultiPath logs = s.log();
  const MultiPath first_log(s.grid(), {logs.asset(0)}, false);
  const SmoothFunction exp_fn{
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::exp(x[0]); },
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
      {}};
  const SimplexWeights equal = SimplexWeights::equal(s.dimension());
  const DiscreteSimplexMeasure mu = measure_uniform_dirichlet(s.dimension(), 200, 7);

  std::vector<ConvergenceReport> reports = {
      {"ito_formula_residual", {}, {}, false},    {"exponential_ode_residual", {}, {}, false},
      {"log_ito_deviation", {}, {}, false},       {"self_financing_residual", {}, {}, false},
      {"universal_consistency_residual", {}, {}, false},
  };
  for (int level : levels) {
    const double residuals[] = {
        ito_formula_residual(exp_fn, first_log, level),
        exponential_ode_residual(logs.asset(0), level),
        log_ito_deviation(s.asset(0), level),
        self_financing_residual(strategy_to_shares(StrategyPath::constant(s.grid(), level, equal), s, level), s),
        universal_consistency_residual(universal_portfolio(mu, s, level), s, level),
    };
    for (std::size_t q = 0; q < reports.size(); ++q) {
      reports[q].levels.push_back(level);
      reports[q].residuals.push_back(residuals[q]);
    }
  }
  for (auto& r : reports) r.monotone_decrease = is_monotone_decrease(r.residuals);
  return reports;
}

std::vector<ConvergenceReport> convergence_suite(const std::string& fixture, std::span<const int> levels) {
  return convergence_suite(make_fixture(fixture), levels);
}

MultiPath geometric_market(const GridSpec& grid, std::span<const GeometricSpec> assets) {
  std::vector<SampledPath> paths;
  paths.reserve(assets.size());
  for (const auto& a : assets) paths.push_back(generate_geometric(grid, a.seed, a.sigma, a.drift, a.s0));
  return MultiPath(grid, std::move(paths), true);
}

MultiPath make_fixture(const std::string& name) {
  const GridSpec grid(1.0, 12);
  if (name == "constant") {
    const std::size_t n = grid.points(grid.finest_level());
    return MultiPath(grid, {SampledPath(grid, std::vector<double>(n, 1.0)), SampledPath(grid, std::vector<double>(n, 2.5))},
                     true);
  }
  if (name == "geometric") {
    const GeometricSpec specs[] = {{0.2, 0.0, 100.0, 101}, {0.35, 0.0, 50.0, 202}};
    return geometric_market(grid, specs);
  }
  if (name == "geometric3") {
    const GeometricSpec specs[] = {{0.2, 0.0, 100.0, 301}, {0.3, 0.0, 40.0, 302}, {0.25, 0.0, 75.0, 303}};
    return geometric_market(grid, specs);
  }
  throw Error(ErrorCode::UnknownFixture, "unknown fixture '" + name + "'");
}

bool VerificationRun::passed() const {
  for (const auto& r : inequalities) {
    if (!r.pass) return false;
  }
  for (const auto& r : convergence) {
    if (!r.monotone_decrease) return false;
  }
  return true;
}

VerificationRun run_verification(const MultiPath& s, const SimplexWeights& pi, int level,
                                 std::span<const int> levels, const VerifyOptions& options) {
  VerificationRun run;
  run.inequalities.push_back(check_geometric_mean_bound(pi, s, level, options));
  run.inequalities.push_back(check_growth_rate(pi, s, level, options));
  run.inequalities.push_back(check_variance_bound(pi, s, level, options));
  run.inequalities.push_back(check_volatility_bound(pi, s, level, options));
  run.convergence = convergence_suite(s, levels);
  return run;
}

}  // namespace pathfolio
