#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pathfolio/paths.hpp"

namespace pathfolio {

/// Integrand values xi_s (d-vectors) at every level-n time, row-major.
class IntegrandPath {
 public:
  IntegrandPath(GridSpec grid, int level, std::size_t dimension, std::vector<double> values);

  /// Same vector at every level-n time.
  static IntegrandPath constant(GridSpec grid, int level, std::span<const double> value);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] int level() const noexcept { return level_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  [[nodiscard]] std::size_t points() const noexcept { return values_.size() / dimension_; }
  [[nodiscard]] std::span<const double> row(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * dimension_, dimension_);
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

 private:
  GridSpec grid_;
  int level_;
  std::size_t dimension_;
  std::vector<double> values_;
};

/// Running Föllmer integral at level-n times; values[0] == 0.
struct IntegralPath {
  GridSpec grid;
  int level;
  std::vector<double> values;
};

/// Nonanticipative Riemann sum of xi_s . (X_{s'} - X_s) over completed
/// level-n steps.
IntegralPath follmer_integral(const IntegrandPath& xi, const MultiPath& x, int level);
IntegralPath follmer_integral(const IntegrandPath& xi, const SampledPath& x, int level);

/// exp(X_t - qv_t / 2) at the level of `qv`, returned on grid.coarsened(level).
SampledPath doleans_exponential(const SampledPath& x, const VariationPath& qv);

/// log Y_t + QV(log Y)_t / 2 at level-n times, on grid.coarsened(level).
SampledPath ito_logarithm(const SampledPath& y, int level);

struct InversionDeviation {
  double exp_of_log = 0.0;  // sup |E(L(Y)) - Y| / |Y|
  double log_of_exp = 0.0;  // sup |L(E(X)) - X|
  [[nodiscard]] double max() const noexcept { return exp_of_log > log_of_exp ? exp_of_log : log_of_exp; }
};

/// E(L(Y)) reuses QV(log Y) for the quadratic variation of L(Y), so that
/// direction cancels exactly. L(E(X)) takes the QV of the sampled path
/// log E(X) = X - QV(X)/2, which differs from QV(X) by terms that vanish as
/// the level grows. exp_of_log is only evaluated when every value is
/// positive (otherwise it is reported as 0).
InversionDeviation inversion_check(const SampledPath& path, int level);

/// Twice-differentiable f(x, a): x in R^d, a the bounded-variation argument.
/// Hessian is d x d row-major; bv_gradient may be left empty when there is
/// no bounded-variation argument.
struct SmoothFunction {
  using Point = std::span<const double>;
  std::function<double(Point x, Point a)> value;
  std::function<std::vector<double>(Point x, Point a)> gradient;
  std::function<std::vector<double>(Point x, Point a)> hessian;
  std::function<std::vector<double>(Point x, Point a)> bv_gradient;
};

/// sup over level-n times of |f(X_t, A_t) - f(X_0, A_0) - (Itô expansion)|,
/// with every integral a left-point sum at the same level.
double ito_formula_residual(const SmoothFunction& f, const MultiPath& x, const MultiPath& bv, int level);
double ito_formula_residual(const SmoothFunction& f, const MultiPath& x, int level);

/// sup |Z_t - Z_0 - sum Z_s dX_s| for Z = E(X) at the given level.
double exponential_ode_residual(const SampledPath& x, int level);

/// sup |L(Y)_t - log Y_0 - sum (Y_{s'} - Y_s) / Y_s| at the given level.
double log_ito_deviation(const SampledPath& y, int level);

}  // namespace pathfolio
