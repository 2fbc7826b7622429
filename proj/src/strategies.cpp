#include "pathfolio/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pathfolio/summation.hpp"

namespace pathfolio {

// ---------------------------------------------------------------------------
// Weight types

SimplexWeights::SimplexWeights(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw Error(ErrorCode::DimensionMismatch, "simplex weights need at least one component");
  CompensatedSum sum;
  for (double v : w_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "simplex weight is not finite");
    if (v < 0.0) throw Error(ErrorCode::NegativeWeight, "simplex weight is negative");
    sum.add(v);
  }
  if (std::fabs(sum.value() - 1.0) > kSumTolerance) {
    throw Error(ErrorCode::InvalidArgument, "simplex weights sum to " + std::to_string(sum.value()));
  }
}

SimplexWeights SimplexWeights::equal(std::size_t d) {
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "simplex dimension must be positive");
  return SimplexWeights(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

SimplexWeights SimplexWeights::vertex(std::size_t d, std::size_t i) {
  if (i >= d) throw Error(ErrorCode::IndexOutOfRange, "vertex index outside the simplex dimension");
  std::vector<double> w(d, 0.0);
  w[i] = 1.0;
  return SimplexWeights(std::move(w));
}

StrategyPath::StrategyPath(GridSpec grid, int level, std::size_t dimension, std::vector<double> values,
                           WeightMode mode)
    : grid_(grid), level_(level), dimension_(dimension), values_(std::move(values)), mode_(mode) {
  if (dimension_ == 0) throw Error(ErrorCode::DimensionMismatch, "strategy dimension must be positive");
  if (values_.size() != grid_.points(level_) * dimension_) {
    throw Error(ErrorCode::InvalidPath, "strategy length does not match the level grid");
  }
  for (std::size_t k = 0; k < points(); ++k) {
    CompensatedSum sum;
    for (double v : row(k)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidPath, "strategy weight is not finite");
      if (mode_ == WeightMode::Simplex && v < -kNegativeTolerance) {
        throw Error(ErrorCode::NegativeWeight, "negative weight in simplex mode at index " + std::to_string(k));
      }
      sum.add(v);
    }
    if (std::fabs(sum.value() - 1.0) > kSumTolerance) {
      throw Error(ErrorCode::InvalidArgument,
                  "strategy weights at index " + std::to_string(k) + " sum to " + std::to_string(sum.value()));
    }
  }
}

StrategyPath StrategyPath::constant(GridSpec grid, int level, const SimplexWeights& pi) {
  const std::size_t n = grid.points(level);
  std::vector<double> values;
  values.reserve(n * pi.dimension());
  for (std::size_t k = 0; k < n; ++k) values.insert(values.end(), pi.values().begin(), pi.values().end());
  return StrategyPath(grid, level, pi.dimension(), std::move(values), WeightMode::Simplex);
}

// ---------------------------------------------------------------------------
// Portfolio value

namespace {

void require_prices(const MultiPath& s) {
  if (!s.positive()) throw Error(ErrorCode::NonpositiveValue, "prices must carry the positivity flag");
  if (s.dimension() == 0) throw Error(ErrorCode::DimensionMismatch, "market has no assets");
}

void require_compatible(const StrategyPath& pi, const MultiPath& s, int level) {
  if (!(pi.grid() == s.grid())) throw Error(ErrorCode::GridMismatch, "strategy and prices use different grids");
  if (pi.level() != level) throw Error(ErrorCode::LevelOutOfRange, "strategy is sampled at a different level");
  if (pi.dimension() != s.dimension()) throw Error(ErrorCode::DimensionMismatch, "strategy/price dimension");
}

}  // namespace

SampledPath portfolio_value(const StrategyPath& pi, const MultiPath& s, int level) {
  require_prices(s);
  require_compatible(pi, s, level);
  const GridSpec coarse = s.grid().coarsened(level);
  const std::size_t d = s.dimension();
  const std::size_t n = coarse.points(level);

  // L(S^i) per asset at level n, and the level-n log-price samples.
  std::vector<SampledPath> itologs;
  std::vector<std::vector<double>> logs;
  itologs.reserve(d);
  logs.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    itologs.push_back(ito_logarithm(s.asset(i), level));
    std::vector<double> x = s.asset(i).at_level(level);
    for (double& v : x) v = std::log(v);
    logs.push_back(std::move(x));
  }
  const MultiPath itolog_market(coarse, std::move(itologs), false);
  const IntegrandPath integrand(coarse, level, d, std::vector<double>(pi.values().begin(), pi.values().end()));
  const IntegralPath integral = follmer_integral(integrand, itolog_market, level);

  std::vector<double> v(n);
  v[0] = 1.0;
  CompensatedSum qv;
  for (std::size_t k = 1; k < n; ++k) {
    const auto w = pi.row(k - 1);
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += w[i] * (logs[i][k] - logs[i][k - 1]);
    qv.add(dot * dot);
    v[k] = std::exp(integral.values[k] - 0.5 * qv.value());
  }
  return SampledPath(coarse, std::move(v));
}

ConstantRebalancedBasis::ConstantRebalancedBasis(const MultiPath& s, int level)
    : grid_(s.grid()),
      level_(level),
      dimension_(s.dimension()),
      points_(s.grid().points(level)) {
  require_prices(s);
  const MultiPath logs = s.log();
  log_ratio_.resize(points_ * dimension_);
  for (std::size_t i = 0; i < dimension_; ++i) {
    const std::vector<double> x = logs.asset(i).at_level(level);
    for (std::size_t k = 0; k < points_; ++k) log_ratio_[k * dimension_ + i] = x[k] - x[0];
  }
  gram_ = covariation_matrices(logs, level);
}

double ConstantRebalancedBasis::quadratic_form(const SimplexWeights& pi, std::size_t k) const {
  const auto c = covariation(k);
  const std::size_t d = dimension_;
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) acc.add(pi[i] * pi[j] * c[i * d + j]);
  }
  return acc.value();
}

double ConstantRebalancedBasis::diversification(const SimplexWeights& pi, std::size_t k) const {
  const auto c = covariation(k);
  const std::size_t d = dimension_;
  // sum_i pi_i c_ii - sum_ij pi_i pi_j c_ij, accumulated in one compensated sum.
  CompensatedSum acc;
  for (std::size_t i = 0; i < d; ++i) {
    acc.add(pi[i] * c[i * d + i]);
    for (std::size_t j = 0; j < d; ++j) acc.add(-pi[i] * pi[j] * c[i * d + j]);
  }
  return acc.value();
}

double ConstantRebalancedBasis::weighted_log_ratio(const SimplexWeights& pi, std::size_t k) const {
  const auto x = log_ratio(k);
  CompensatedSum acc;
  for (std::size_t i = 0; i < dimension_; ++i) acc.add(pi[i] * x[i]);
  return acc.value();
}

std::vector<double> ConstantRebalancedBasis::log_value(const SimplexWeights& pi) const {
  if (pi.dimension() != dimension_) throw Error(ErrorCode::DimensionMismatch, "weights/market dimension");
  std::vector<double> out(points_);
  for (std::size_t k = 0; k < points_; ++k) {
    out[k] = weighted_log_ratio(pi, k) + 0.5 * diversification(pi, k);
  }
  return out;
}

std::vector<double> ConstantRebalancedBasis::value(const SimplexWeights& pi) const {
  std::vector<double> out = log_value(pi);
  for (double& v : out) v = std::exp(v);
  return out;
}

SampledPath constant_rebalanced_value(const SimplexWeights& pi, const MultiPath& s, int level) {
  const ConstantRebalancedBasis basis(s, level);
  return SampledPath(s.grid().coarsened(level), basis.value(pi));
}

// ---------------------------------------------------------------------------
// Shares <-> weights

SharesPath shares_from_weights(const StrategyPath& pi, std::span<const double> value, const MultiPath& s) {
  require_prices(s);
  const int level = pi.level();
  require_compatible(pi, s, level);
  const std::size_t n = pi.points();
  const std::size_t d = pi.dimension();
  if (value.size() != n) throw Error(ErrorCode::InvalidPath, "value path length does not match the strategy");

  SharesPath out{s.grid(), level, d, std::vector<double>(n * d), std::vector<double>(value.begin(), value.end())};
  const std::size_t stride = s.grid().stride(level);
  for (std::size_t k = 0; k < n; ++k) {
    const auto w = pi.row(k);
    for (std::size_t i = 0; i < d; ++i) out.shares[k * d + i] = w[i] * value[k] / s.asset(i)[k * stride];
  }
  return out;
}

SharesPath strategy_to_shares(const StrategyPath& pi, const MultiPath& s, int level) {
  if (pi.mode() != WeightMode::Simplex) {
    for (double w : pi.values()) {
      if (w < -StrategyPath::kNegativeTolerance) {
        throw Error(ErrorCode::NegativeWeight, "shares correspondence requires nonnegative weights");
      }
    }
  }
  const SampledPath v = portfolio_value(pi, s, level);
  return shares_from_weights(pi, v.values(), s);
}

StrategyPath shares_to_strategy(const SharesPath& xi, const MultiPath& s) {
  require_prices(s);
  if (!(xi.grid == s.grid())) throw Error(ErrorCode::GridMismatch, "shares and prices use different grids");
  if (xi.dimension != s.dimension()) throw Error(ErrorCode::DimensionMismatch, "shares/price dimension");
  const std::size_t n = s.grid().points(xi.level);
  const std::size_t d = xi.dimension;
  if (xi.shares.size() != n * d) throw Error(ErrorCode::InvalidShares, "shares length does not match the grid");
  const std::size_t stride = s.grid().stride(xi.level);

  std::vector<double> weights(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto row = xi.row(k);
    CompensatedSum value;
    for (std::size_t i = 0; i < d; ++i) {
      if (row[i] < 0.0) throw Error(ErrorCode::NegativeWeight, "negative share count at index " + std::to_string(k));
      value.add(row[i] * s.asset(i)[k * stride]);
    }
    const double v = value.value();
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidShares, "portfolio value is not positive at index " +
                                                             std::to_string(k));
    if (k == 0 && std::fabs(v - 1.0) > 1e-10) {
      throw Error(ErrorCode::InvalidShares, "initial portfolio value is " + std::to_string(v) + ", not 1");
    }
    for (std::size_t i = 0; i < d; ++i) weights[k * d + i] = row[i] * s.asset(i)[k * stride] / v;
  }
  return StrategyPath(s.grid(), xi.level, d, std::move(weights), WeightMode::Simplex);
}

double self_financing_residual(const SharesPath& xi, const MultiPath& s) {
  if (!(xi.grid == s.grid())) throw Error(ErrorCode::GridMismatch, "shares and prices use different grids");
  if (xi.dimension != s.dimension()) throw Error(ErrorCode::DimensionMismatch, "shares/price dimension");
  const std::size_t n = s.grid().points(xi.level);
  const std::size_t stride = s.grid().stride(xi.level);
  const std::size_t d = xi.dimension;
  CompensatedSum gains;
  double residual = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const auto row = xi.row(k - 1);
    for (std::size_t i = 0; i < d; ++i) {
      const auto p = s.asset(i).values();
      gains.add(row[i] * (p[k * stride] - p[(k - 1) * stride]));
    }
    residual = std::max(residual, std::fabs(xi.value[k] - xi.value[0] - gains.value()));
  }
  return residual;
}

// ---------------------------------------------------------------------------
// CPPI

void CppiParams::validate() const {
  if (!(floor_fraction >= 0.0 && floor_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "CPPI floor fraction must lie in [0, 1)");
  }
  if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
    throw Error(ErrorCode::InvalidArgument, "CPPI multiplier must be positive");
  }
  if (!std::isfinite(rate)) throw Error(ErrorCode::InvalidArgument, "CPPI rate must be finite");
}

namespace {

SampledPath money_market_account(const GridSpec& grid, double rate, const std::optional<SampledPath>& rate_path) {
  const int finest = grid.finest_level();
  const std::size_t n = grid.points(finest);
  std::vector<double> b(n);
  if (rate_path) {
    if (!(rate_path->grid() == grid)) throw Error(ErrorCode::GridMismatch, "rate path grid differs from prices");
    const double dt = grid.step(finest);
    CompensatedSum integral;
    b[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
      integral.add((*rate_path)[k - 1] * dt);
      b[k] = std::exp(integral.value());
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) b[k] = std::exp(rate * grid.time(finest, k));
  }
  return SampledPath(grid, std::move(b));
}

}  // namespace

CppiResult cppi(const CppiParams& params, const SampledPath& s, int level, const std::optional<SampledPath>& rate_path) {
  params.validate();
  const GridSpec& grid = s.grid();
  const SampledPath bank = money_market_account(grid, params.rate, rate_path);
  MultiPath market(grid, {s, bank}, true);

  const double alpha = params.floor_fraction;
  const double m = params.multiplier;
  const std::vector<double> price = s.at_level(level);
  const std::vector<double> b = bank.at_level(level);
  std::vector<double> log_price(s.values().begin(), s.values().end());
  for (double& v : log_price) v = std::log(v);
  const VariationPath qv = quadratic_variation(SampledPath(grid, std::move(log_price)), level);

  const std::size_t n = price.size();
  std::vector<double> cushion(n), value(n), weights(2 * n);
  std::vector<std::size_t> leveraged;
  for (std::size_t k = 0; k < n; ++k) {
    cushion[k] = (1.0 - alpha) * std::pow(price[k] / price[0], m) * std::pow(b[k], 1.0 - m) *
                 std::exp(-0.5 * m * (m - 1.0) * qv.values[k]);
    value[k] = cushion[k] + alpha * b[k];
    const double risky = m * cushion[k] / value[k];
    weights[2 * k] = risky;
    weights[2 * k + 1] = 1.0 - risky;
    if (risky > 1.0) leveraged.push_back(k);
  }
  const GridSpec coarse = grid.coarsened(level);
  return CppiResult{StrategyPath(grid, level, 2, std::move(weights), WeightMode::Generalized),
                    SampledPath(coarse, std::move(value)),
                    SampledPath(coarse, std::move(cushion)),
                    SampledPath(coarse, b),
                    std::move(market),
                    std::move(leveraged)};
}

SharesPath cppi_shares(const CppiResult& result) {
  return shares_from_weights(result.weights, result.value.values(), result.market);
}

}  // namespace pathfolio
