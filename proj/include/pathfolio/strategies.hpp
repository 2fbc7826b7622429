#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pathfolio/calculus.hpp"
#include "pathfolio/paths.hpp"

namespace pathfolio {

/// A point of the standard simplex: nonnegative components summing to 1.
class SimplexWeights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexWeights(std::vector<double> w);

  static SimplexWeights equal(std::size_t d);
  static SimplexWeights vertex(std::size_t d, std::size_t i);

  [[nodiscard]] std::size_t dimension() const noexcept { return w_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return w_; }
  [[nodiscard]] double operator[](std::size_t i) const { return w_[i]; }

  bool operator==(const SimplexWeights&) const = default;

 private:
  std::vector<double> w_;
};

enum class WeightMode {
  Simplex,      // components in [0, 1]
  Generalized,  // components sum to 1 but may be negative (CPPI leverage)
};

/// Portfolio weights pi_t at every level-n time, row-major.
class StrategyPath {
 public:
  static constexpr double kSumTolerance = 1e-10;
  static constexpr double kNegativeTolerance = 1e-12;

  StrategyPath(GridSpec grid, int level, std::size_t dimension, std::vector<double> values, WeightMode mode);

  static StrategyPath constant(GridSpec grid, int level, const SimplexWeights& pi);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t points() const noexcept { return values_.size() / dimension_; }
  [[nodiscard]] WeightMode mode() const noexcept { return mode_; }
  [[nodiscard]] std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * dimension_, dimension_);
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

 private:
  GridSpec grid_;
  int level_;
  std::size_t dimension_;
  std::vector<double> values_;
  WeightMode mode_;
};

/// Share holdings xi_t with the paired value V_t = xi_t . S_t.
struct SharesPath {
  GridSpec grid;
  int level;
  std::size_t dimension;
  std::vector<double> shares;  // row-major [k][i]
  std::vector<double> value;

  [[nodiscard]] std::span<const double> row(std::size_t k) const {
    return std::span<const double>(shares).subspan(k * dimension, dimension);
  }
};

/// V^pi = E( int pi dL(S) ) at level n.
///
/// The quadratic variation of the stochastic integral is taken as
/// sum_s pi_s^T dC_s pi_s with C the covariation of log S: L(S) and log S
/// differ by a bounded-variation path, which contributes nothing to the
/// quadratic variation in the limit. Returned on grid.coarsened(level).
SampledPath portfolio_value(const StrategyPath& pi, const MultiPath& s, int level);

/// Per-level log-price statistics shared by every constant rebalanced
/// portfolio on the same market: log(S_t / S_0) and the running Gram
/// matrix C_t of log-price increments.
class ConstantRebalancedBasis {
 public:
  ConstantRebalancedBasis(const MultiPath& s, int level);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t points() const noexcept { return points_; }

  [[nodiscard]] std::span<const double> log_ratio(std::size_t k) const {
    return std::span<const double>(log_ratio_).subspan(k * dimension_, dimension_);
  }
  /// Row-major d x d covariation matrix at level-n time k.
  [[nodiscard]] std::span<const double> covariation(std::size_t k) const {
    return std::span<const double>(gram_).subspan(k * dimension_ * dimension_, dimension_ * dimension_);
  }

  /// sum_i pi_i c_ii(t_k) - pi^T C(t_k) pi, the nonnegative excess.
  [[nodiscard]] double diversification(const SimplexWeights& pi, std::size_t k) const;
  [[nodiscard]] double quadratic_form(const SimplexWeights& pi, std::size_t k) const;
  /// pi . log(S_t / S_0)
  [[nodiscard]] double weighted_log_ratio(const SimplexWeights& pi, std::size_t k) const;

  /// log V^pi at every level-n time.
  [[nodiscard]] std::vector<double> log_value(const SimplexWeights& pi) const;
  [[nodiscard]] std::vector<double> value(const SimplexWeights& pi) const;

 private:
  GridSpec grid_;
  int level_;
  std::size_t dimension_;
  std::size_t points_;
  std::vector<double> log_ratio_;
  std::vector<double> gram_;
};

/// prod (S^i_t / S^i_0)^{pi_i} * exp((sum pi_i c_ii - pi^T C pi) / 2).
SampledPath constant_rebalanced_value(const SimplexWeights& pi, const MultiPath& s, int level);

/// xi^i = pi^i V / S^i with V = portfolio_value(pi). Simplex mode only.
SharesPath strategy_to_shares(const StrategyPath& pi, const MultiPath& s, int level);

/// pi^i = xi^i S^i / (xi . S). Requires xi >= 0, V_0 = 1 and V > 0.
StrategyPath shares_to_strategy(const SharesPath& xi, const MultiPath& s);

/// xi = pi V / S in either weight mode, for an externally supplied value path.
SharesPath shares_from_weights(const StrategyPath& pi, std::span<const double> value, const MultiPath& s);

/// sup_t |V_t - V_0 - sum xi_s . (S_{s'} - S_s)| at the shares' level.
double self_financing_residual(const SharesPath& xi, const MultiPath& s);

struct CppiParams {
  double floor_fraction;  // alpha in [0, 1)
  double multiplier;      // m > 0
  double rate = 0.0;      // constant short rate r; B_t = exp(r t)

  void validate() const;
};

struct CppiResult {
  StrategyPath weights;  // generalized mode, (risky, money market)
  SampledPath value;
  SampledPath cushion;
  SampledPath money_market;  // B at level-n times
  MultiPath market;          // (S, B) on the finest grid
  /// Level-n indices where the risky weight exceeds 1 (leveraged).
  std::vector<std::size_t> leveraged_indices;
};

/// Cushion C = (1 - alpha) (S/S_0)^m B^{1-m} exp(-m(m-1) QV(log S) / 2),
/// V = C + alpha B, pi^1 = m C / V, pi^2 = 1 - pi^1.
///
/// `rate_path`, when given, overrides the constant rate: a short-rate path
/// on the finest grid, integrated by left-point sums.
CppiResult cppi(const CppiParams& params, const SampledPath& s, int level,
                const std::optional<SampledPath>& rate_path = std::nullopt);

SharesPath cppi_shares(const CppiResult& result);

}  // namespace pathfolio
