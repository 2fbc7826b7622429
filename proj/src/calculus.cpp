#include "pathfolio/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "pathfolio/summation.hpp"

namespace pathfolio {

IntegrandPath::IntegrandPath(GridSpec grid, int level, std::size_t dimension, std::vector<double> values)
    : grid_(grid), level_(level), dimension_(dimension), values_(std::move(values)) {
  if (dimension_ == 0) throw Error(ErrorCode::DimensionMismatch, "integrand dimension must be positive");
  if (values_.size() != grid_.points(level_) * dimension_) {
    throw Error(ErrorCode::InvalidPath, "integrand length does not match the level-" + std::to_string(level_) +
                                            " grid");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidPath, "integrand contains a non-finite value");
  }
}

IntegrandPath IntegrandPath::constant(GridSpec grid, int level, std::span<const double> value) {
  const std::size_t n = grid.points(level);
  std::vector<double> values;
  values.reserve(n * value.size());
  for (std::size_t k = 0; k < n; ++k) values.insert(values.end(), value.begin(), value.end());
  return IntegrandPath(grid, level, value.size(), std::move(values));
}

IntegralPath follmer_integral(const IntegrandPath& xi, const MultiPath& x, int level) {
  if (!(xi.grid() == x.grid())) throw Error(ErrorCode::GridMismatch, "integrand and integrator grids differ");
  if (xi.level() != level) throw Error(ErrorCode::LevelOutOfRange, "integrand is sampled at a different level");
  if (xi.dimension() != x.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "integrand dimension " + std::to_string(xi.dimension()) +
                                                  " != path dimension " + std::to_string(x.dimension()));
  }
  const GridSpec& grid = x.grid();
  const std::size_t stride = grid.stride(level);
  const std::size_t n = grid.points(level);
  const std::size_t d = x.dimension();

  IntegralPath out{grid, level, std::vector<double>(n, 0.0)};
  CompensatedSum acc;
  for (std::size_t k = 1; k < n; ++k) {
    const auto xi_s = xi.row(k - 1);
    for (std::size_t i = 0; i < d; ++i) {
      const auto v = x.asset(i).values();
      acc.add(xi_s[i] * (v[k * stride] - v[(k - 1) * stride]));
    }
    out.values[k] = acc.value();
  }
  return out;
}

IntegralPath follmer_integral(const IntegrandPath& xi, const SampledPath& x, int level) {
  return follmer_integral(xi, MultiPath(x.grid(), {x}, false), level);
}

SampledPath doleans_exponential(const SampledPath& x, const VariationPath& qv) {
  const GridSpec& grid = x.grid();
  if (qv.grid.horizon() != grid.horizon() || qv.level < 1 || qv.level > grid.finest_level() ||
      qv.values.size() != grid.points(qv.level)) {
    throw Error(ErrorCode::LevelOutOfRange, "quadratic variation level does not match the path");
  }
  const std::vector<double> xs = x.at_level(qv.level);
  std::vector<double> z(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) z[k] = std::exp(xs[k] - 0.5 * qv.values[k]);
  return SampledPath(grid.coarsened(qv.level), std::move(z));
}

namespace {

std::vector<double> log_values(const SampledPath& y) {
  std::vector<double> v(y.values().begin(), y.values().end());
  for (double& e : v) {
    if (!(e > 0.0)) throw Error(ErrorCode::NonpositiveValue, "Itô logarithm of a nonpositive value");
    e = std::log(e);
  }
  return v;
}

bool all_positive(const SampledPath& y) {
  return std::all_of(y.values().begin(), y.values().end(), [](double v) { return v > 0.0; });
}

}  // namespace

SampledPath ito_logarithm(const SampledPath& y, int level) {
  const SampledPath log_y(y.grid(), log_values(y));
  const VariationPath qv = quadratic_variation(log_y, level);
  std::vector<double> out = log_y.at_level(level);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += 0.5 * qv.values[k];
  return SampledPath(y.grid().coarsened(level), std::move(out));
}

InversionDeviation inversion_check(const SampledPath& path, int level) {
  InversionDeviation dev;

  if (all_positive(path)) {
    const SampledPath log_y(path.grid(), log_values(path));
    const VariationPath qv = quadratic_variation(log_y, level);
    const std::vector<double> y = path.at_level(level);
    const std::vector<double> ly = log_y.at_level(level);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double itolog = ly[k] + 0.5 * qv.values[k];
      const double back = std::exp(itolog - 0.5 * qv.values[k]);
      dev.exp_of_log = std::max(dev.exp_of_log, std::fabs(back - y[k]) / std::fabs(y[k]));
    }
  }

  const VariationPath qv = quadratic_variation(path, level);
  const SampledPath z = doleans_exponential(path, qv);
  const SampledPath itolog = ito_logarithm(z, level);
  const std::vector<double> x = path.at_level(level);
  for (std::size_t k = 0; k < x.size(); ++k) {
    dev.log_of_exp = std::max(dev.log_of_exp, std::fabs(itolog[k] - x[k]));
  }
  return dev;
}

namespace {

template <typename Fn>
std::vector<double> call_vector(const Fn& fn, SmoothFunction::Point x, SmoothFunction::Point a,
                                std::size_t expected, const char* what) {
  if (!fn) throw Error(ErrorCode::CallbackFailure, std::string(what) + " callback is missing");
  std::vector<double> out;
  try {
    out = fn(x, a);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CallbackFailure, std::string(what) + " callback threw: " + e.what());
  }
  if (out.size() != expected) {
    throw Error(ErrorCode::CallbackFailure, std::string(what) + " callback returned " +
                                                std::to_string(out.size()) + " values, expected " +
                                                std::to_string(expected));
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw Error(ErrorCode::CallbackFailure, std::string(what) + " returned non-finite");
  }
  return out;
}

double call_value(const SmoothFunction& f, SmoothFunction::Point x, SmoothFunction::Point a) {
  if (!f.value) throw Error(ErrorCode::CallbackFailure, "value callback is missing");
  double v = 0.0;
  try {
    v = f.value(x, a);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CallbackFailure, std::string("value callback threw: ") + e.what());
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::CallbackFailure, "value callback returned non-finite");
  return v;
}

// Level-n samples of every component, as rows [k][i].
std::vector<double> rows_at_level(const MultiPath& p, int level) {
  const std::size_t n = p.grid().points(level);
  const std::size_t d = p.dimension();
  const std::size_t stride = p.grid().stride(level);
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto v = p.asset(i).values();
    for (std::size_t k = 0; k < n; ++k) out[k * d + i] = v[k * stride];
  }
  return out;
}

}  // namespace

double ito_formula_residual(const SmoothFunction& f, const MultiPath& x, const MultiPath& bv, int level) {
  if (!(x.grid() == bv.grid())) throw Error(ErrorCode::GridMismatch, "path and bounded-variation data differ");
  const std::size_t n = x.grid().points(level);
  const std::size_t d = x.dimension();
  const std::size_t m = bv.dimension();
  const std::vector<double> xs = rows_at_level(x, level);
  const std::vector<double> as = rows_at_level(bv, level);
  auto xrow = [&](std::size_t k) { return std::span<const double>(xs).subspan(k * d, d); };
  auto arow = [&](std::size_t k) { return std::span<const double>(as).subspan(k * m, m); };

  const double f0 = call_value(f, xrow(0), arow(0));
  CompensatedSum rhs;
  double residual = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const auto xs_prev = xrow(k - 1);
    const auto as_prev = arow(k - 1);
    const auto grad = call_vector(f.gradient, xs_prev, as_prev, d, "gradient");
    const auto hess = call_vector(f.hessian, xs_prev, as_prev, d * d, "hessian");
    const auto xs_next = xrow(k);
    const auto as_next = arow(k);
    if (m > 0) {
      const auto bgrad = call_vector(f.bv_gradient, xs_prev, as_prev, m, "bv_gradient");
      for (std::size_t j = 0; j < m; ++j) rhs.add(bgrad[j] * (as_next[j] - as_prev[j]));
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double dxi = xs_next[i] - xs_prev[i];
      rhs.add(grad[i] * dxi);
      for (std::size_t j = 0; j < d; ++j) {
        rhs.add(0.5 * hess[i * d + j] * dxi * (xs_next[j] - xs_prev[j]));
      }
    }
    const double lhs = call_value(f, xs_next, as_next) - f0;
    residual = std::max(residual, std::fabs(lhs - rhs.value()));
  }
  return residual;
}

double ito_formula_residual(const SmoothFunction& f, const MultiPath& x, int level) {
  return ito_formula_residual(f, x, MultiPath(x.grid(), {}, false), level);
}

double exponential_ode_residual(const SampledPath& x, int level) {
  const SampledPath z = doleans_exponential(x, quadratic_variation(x, level));
  const std::vector<double> xs = x.at_level(level);
  CompensatedSum acc(z[0]);
  double residual = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    acc.add(z[k - 1] * (xs[k] - xs[k - 1]));
    residual = std::max(residual, std::fabs(z[k] - acc.value()));
  }
  return residual;
}

double log_ito_deviation(const SampledPath& y, int level) {
  const SampledPath itolog = ito_logarithm(y, level);
  const std::vector<double> ys = y.at_level(level);
  const double log_y0 = std::log(ys[0]);
  CompensatedSum acc;
  double deviation = 0.0;
  for (std::size_t k = 1; k < ys.size(); ++k) {
    acc.add((ys[k] - ys[k - 1]) / ys[k - 1]);
    deviation = std::max(deviation, std::fabs(itolog[k] - log_y0 - acc.value()));
  }
  return deviation;
}

}  // namespace pathfolio
