#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "oracle.hpp"
#include "pathfolio/calculus.hpp"

using namespace pathfolio;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

SampledPath from_fn(const GridSpec& grid, auto&& fn) {
  std::vector<double> v(grid.points(grid.finest_level()));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid.time(grid.finest_level(), k));
  return SampledPath(grid, v);
}

IntegrandPath integrand_from(const SampledPath& x, int level) {
  return IntegrandPath(x.grid(), level, 1, x.at_level(level));
}

double sup_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

const SmoothFunction kSquareHalf{
    [](SmoothFunction::Point x, SmoothFunction::Point) { return 0.5 * x[0] * x[0]; },
    [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{x[0]}; },
    [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{1.0}; },
    {}};

const SmoothFunction kExp{
    [](SmoothFunction::Point x, SmoothFunction::Point) { return std::exp(x[0]); },
    [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
    [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
    {}};

}  // namespace

TEST_CASE("integrand path validation") {
  const GridSpec grid(1.0, 4);
  CHECK(code_of([&] { IntegrandPath(grid, 2, 1, std::vector<double>(4, 0.0)); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { IntegrandPath(grid, 2, 0, {}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { IntegrandPath(grid, 5, 1, std::vector<double>(33, 0.0)); }) == ErrorCode::LevelOutOfRange);
  std::vector<double> bad(5, 0.0);
  bad[2] = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { IntegrandPath(grid, 2, 1, bad); }) == ErrorCode::InvalidPath);
}

TEST_CASE("follmer_integral examples") {
  const GridSpec grid(1.0, 10);
  const MultiPath x(grid, {generate_walk(grid, 1, 1.0, 0.0), generate_walk(grid, 2, 0.3, 1.0)}, false);
  SUBCASE("unit integrand telescopes") {
    const double ones[] = {1.0, 1.0};
    for (int n : {1, 7, 10}) {
      const auto I = follmer_integral(IntegrandPath::constant(grid, n, ones), x, n);
      const auto a = x.asset(0).at_level(n);
      const auto b = x.asset(1).at_level(n);
      CHECK(I.values.front() == 0.0);
      for (std::size_t k = 0; k < I.values.size(); ++k) {
        CHECK(I.values[k] == doctest::Approx((a[k] - a[0]) + (b[k] - b[0])).epsilon(1e-13).scale(1.0));
      }
    }
  }
  SUBCASE("zero integrand") {
    const double zeros[] = {0.0, 0.0};
    for (double v : follmer_integral(IntegrandPath::constant(grid, 6, zeros), x, 6).values) CHECK(v == 0.0);
  }
  SUBCASE("errors") {
    const double one[] = {1.0};
    CHECK(code_of([&] { follmer_integral(IntegrandPath::constant(grid, 6, one), x, 6); }) ==
          ErrorCode::DimensionMismatch);
    const double two[] = {1.0, 1.0};
    CHECK(code_of([&] { follmer_integral(IntegrandPath::constant(GridSpec(2.0, 10), 6, two), x, 6); }) ==
          ErrorCode::GridMismatch);
    CHECK(code_of([&] { follmer_integral(IntegrandPath::constant(grid, 6, two), x, 7); }) ==
          ErrorCode::LevelOutOfRange);
  }
}

TEST_CASE("discrete Itô identity for the integral of X against itself") {
  const GridSpec grid(1.0, 12);
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SampledPath x = generate_walk(grid, seed, 1.0 + 0.5 * static_cast<double>(seed), 0.7);
    for (int n : {1, 4, 9, 12}) {
      const auto I = follmer_integral(integrand_from(x, n), x, n);
      const auto qv = quadratic_variation(x, n);
      const auto xs = x.at_level(n);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        const double rhs = 0.5 * (xs[k] * xs[k] - xs[0] * xs[0]) - 0.5 * qv.values[k];
        CHECK(std::fabs(I.values[k] - rhs) <= 1e-12);
      }
    }
  }
}

TEST_CASE("follmer_integral matches a long double oracle") {
  const GridSpec grid(1.0, 11);
  const SampledPath x = generate_geometric(grid, 8, 0.5, 0.0, 2.0);
  const SampledPath h = from_fn(grid, [](double t) { return std::cos(5.0 * t); });
  const int n = 9;
  const auto I = follmer_integral(integrand_from(h, n), x, n);
  const auto xs = oracle::sample({x.values().begin(), x.values().end()}, grid.stride(n));
  const auto hs = oracle::sample({h.values().begin(), h.values().end()}, grid.stride(n));
  long double acc = 0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    acc += hs[k - 1] * (xs[k] - xs[k - 1]);
    CHECK(std::fabs(I.values[k] - static_cast<double>(acc)) <= 1e-14);
  }
}

TEST_CASE("follmer_integral is nonanticipative and linear") {
  const GridSpec grid(1.0, 10);
  const int n = 8;
  const SampledPath x = generate_walk(grid, 21, 1.0, 0.0);
  const SampledPath h = generate_walk(grid, 22, 2.0, 0.0);
  const auto base = follmer_integral(integrand_from(h, n), x, n);

  // Perturb everything after level-n index 100.
  std::vector<double> xv(x.values().begin(), x.values().end());
  std::vector<double> hv(h.values().begin(), h.values().end());
  for (std::size_t i = 101 * grid.stride(n); i < xv.size(); ++i) {
    xv[i] += 5.0;
    hv[i] -= 3.0;
  }
  const SampledPath x2(grid, xv);
  const SampledPath h2(grid, hv);
  const auto moved = follmer_integral(integrand_from(h2, n), x2, n);
  for (std::size_t k = 0; k <= 100; ++k) CHECK(moved.values[k] == base.values[k]);
  CHECK(moved.values[101] != base.values[101]);

  // Linearity in the integrand.
  const SampledPath g = from_fn(grid, [](double t) { return t * t - 0.3; });
  std::vector<double> combo(x.size());
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = 2.5 * h[i] - 1.5 * g[i];
  const auto Ih = follmer_integral(integrand_from(h, n), x, n);
  const auto Ig = follmer_integral(integrand_from(g, n), x, n);
  const auto Ic = follmer_integral(integrand_from(SampledPath(grid, combo), n), x, n);
  for (std::size_t k = 0; k < Ic.values.size(); ++k) {
    CHECK(std::fabs(Ic.values[k] - (2.5 * Ih.values[k] - 1.5 * Ig.values[k])) <= 1e-12);
  }
}

TEST_CASE("doleans_exponential examples") {
  const GridSpec grid(1.0, 12);
  SUBCASE("zero path") {
    const SampledPath z(grid, std::vector<double>(grid.points(12), 0.0));
    const SampledPath e = doleans_exponential(z, quadratic_variation(z, 7));
    for (double v : e.values()) CHECK(v == 1.0);
  }
  SUBCASE("linear path") {
    const SampledPath x = from_fn(grid, [](double t) { return t; });
    for (int n : {2, 8, 12}) {
      const SampledPath e = doleans_exponential(x, quadratic_variation(x, n));
      CHECK(e.grid() == grid.coarsened(n));
      CHECK(e.front() == 1.0);
      CHECK(e.back() == doctest::Approx(std::exp(1.0 - std::ldexp(1.0, -n - 1))).epsilon(1e-14));
    }
  }
  SUBCASE("binary walk against the seed stream") {
    const double sigma = 0.6;
    const SampledPath w = generate_walk(grid, 99, sigma, 0.0);
    const SampledPath e = doleans_exponential(w, quadratic_variation(w, 12));
    const double expected = std::exp(static_cast<double>(oracle::walk_end(99, 12, 1.0, sigma, 0.0)) - 0.5 * sigma * sigma);
    CHECK(std::fabs(e.back() - expected) <= 1e-13 * expected);
    for (double v : e.values()) CHECK(v > 0.0);
  }
  SUBCASE("starts at exp(X_0)") {
    const SampledPath x = from_fn(grid, [](double t) { return 0.4 + t; });
    CHECK(doleans_exponential(x, quadratic_variation(x, 3)).front() == doctest::Approx(std::exp(0.4)));
  }
  SUBCASE("qv from another horizon is rejected") {
    const SampledPath x = from_fn(grid, [](double t) { return t; });
    const SampledPath y = from_fn(GridSpec(2.0, 12), [](double t) { return t; });
    CHECK(code_of([&] { doleans_exponential(x, quadratic_variation(y, 5)); }) == ErrorCode::LevelOutOfRange);
  }
}

TEST_CASE("ito_logarithm examples") {
  const GridSpec grid(1.0, 12);
  const SampledPath c(grid, std::vector<double>(grid.points(12), 3.0));
  const SampledPath lc = ito_logarithm(c, 9);
  for (double v : lc.values()) CHECK(v == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  const SampledPath y = from_fn(grid, [](double t) { return std::exp(t); });
  for (int n : {1, 6, 12}) {
    CHECK(ito_logarithm(y, n).back() == doctest::Approx(1.0 + std::ldexp(1.0, -n - 1)).epsilon(1e-13));
  }

  std::vector<double> v(grid.points(12), 1.0);
  v[77] = 0.0;
  CHECK(code_of([&] { ito_logarithm(SampledPath(grid, v), 12); }) == ErrorCode::NonpositiveValue);
}

TEST_CASE("inversion_check") {
  const GridSpec grid(1.0, 12);
  const SampledPath c(grid, std::vector<double>(grid.points(12), 1.7));
  CHECK(inversion_check(c, 10).max() == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));

  const SampledPath s = generate_geometric(grid, 31, 0.35, 0.05, 80.0);
  for (int n : {1, 8, 12}) CHECK(inversion_check(s, n).exp_of_log <= 1e-10);

  const SampledPath w = generate_walk(grid, 32, 1.0, 0.0);
  const double d8 = inversion_check(w, 8).log_of_exp;
  const double d10 = inversion_check(w, 10).log_of_exp;
  const double d12 = inversion_check(w, 12).log_of_exp;
  CHECK(d10 < d8);
  CHECK(d12 < d10);
}

TEST_CASE("ito_formula_residual") {
  const GridSpec grid(1.0, 12);
  const MultiPath w(grid, {generate_walk(grid, 2718, 1.0, 0.0)}, false);

  SUBCASE("identity function is exact") {
    const SmoothFunction id{[](SmoothFunction::Point x, SmoothFunction::Point) { return x[0]; },
                            [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{1.0}; },
                            [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{0.0}; },
                            {}};
    for (int n : {3, 12}) CHECK(ito_formula_residual(id, w, n) <= 1e-13);
  }
  SUBCASE("half square is exact at every level") {
    for (int n = 1; n <= 12; ++n) CHECK(ito_formula_residual(kSquareHalf, w, n) <= 1e-12);
  }
  SUBCASE("exp converges") {
    const double r8 = ito_formula_residual(kExp, w, 8);
    const double r12 = ito_formula_residual(kExp, w, 12);
    CHECK(r12 < r8);
    CHECK(r8 < 0.05);
    CHECK(r12 < 0.05);
  }
  SUBCASE("bounded-variation argument, d = 2") {
    // f(x, a) = x1 x2 + sin(a), a(t) = t^2.
    const MultiPath x2(grid, {generate_walk(grid, 1, 1.0, 0.0), generate_walk(grid, 2, 0.5, 0.0)}, false);
    const MultiPath a(grid, {from_fn(grid, [](double t) { return t * t; })}, false);
    const SmoothFunction f{
        [](SmoothFunction::Point x, SmoothFunction::Point a) { return x[0] * x[1] + std::sin(a[0]); },
        [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{x[1], x[0]}; },
        [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{0.0, 1.0, 1.0, 0.0}; },
        [](SmoothFunction::Point, SmoothFunction::Point a) { return std::vector<double>{std::cos(a[0])}; }};
    const double r6 = ito_formula_residual(f, x2, a, 6);
    const double r12 = ito_formula_residual(f, x2, a, 12);
    CHECK(r12 < r6);
    CHECK(r12 < 1e-3);
  }
  SUBCASE("callback failures") {
    SmoothFunction throwing = kExp;
    throwing.gradient = [](SmoothFunction::Point, SmoothFunction::Point) -> std::vector<double> {
      throw std::runtime_error("boom");
    };
    CHECK(code_of([&] { ito_formula_residual(throwing, w, 5); }) == ErrorCode::CallbackFailure);
    SmoothFunction wrong = kExp;
    wrong.hessian = [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{1.0, 2.0}; };
    CHECK(code_of([&] { ito_formula_residual(wrong, w, 5); }) == ErrorCode::CallbackFailure);
    SmoothFunction nan = kExp;
    nan.value = [](SmoothFunction::Point, SmoothFunction::Point) { return std::nan(""); };
    CHECK(code_of([&] { ito_formula_residual(nan, w, 5); }) == ErrorCode::CallbackFailure);
    const MultiPath a(grid, {from_fn(grid, [](double t) { return t; })}, false);
    CHECK(code_of([&] { ito_formula_residual(kExp, w, a, 5); }) == ErrorCode::CallbackFailure);  // no bv_gradient
    const MultiPath far(GridSpec(2.0, 12), {from_fn(GridSpec(2.0, 12), [](double t) { return t; })}, false);
    CHECK(code_of([&] { ito_formula_residual(kExp, w, far, 5); }) == ErrorCode::GridMismatch);
  }
}

TEST_CASE("exponential_ode_residual") {
  const GridSpec grid(1.0, 12);
  const SampledPath zero(grid, std::vector<double>(grid.points(12), 0.0));
  CHECK(exponential_ode_residual(zero, 10) == 0.0);

  const SampledPath line = from_fn(grid, [](double t) { return 0.8 * t; });
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {4, 6, 8, 10, 12}) {
    const double r = exponential_ode_residual(line, n);
    CHECK(r < prev);
    CHECK(r <= 2.0 * std::ldexp(1.0, -n));  // O(2^-n)
    prev = r;
  }
  const SampledPath w = generate_walk(grid, 4, 1.0, 0.0);
  CHECK(exponential_ode_residual(w, 12) < exponential_ode_residual(w, 8));
}

TEST_CASE("log_ito_deviation") {
  const GridSpec grid(1.0, 12);
  const SampledPath c(grid, std::vector<double>(grid.points(12), 5.0));
  CHECK(log_ito_deviation(c, 8) == 0.0);
  for (std::uint64_t seed : {10u, 11u, 12u}) {
    const SampledPath s = generate_geometric(grid, seed, 0.3, 0.1, 50.0);
    const double d8 = log_ito_deviation(s, 8);
    const double d12 = log_ito_deviation(s, 12);
    CHECK(d12 < d8);
    CHECK(d12 < 1e-2);
  }
  std::vector<double> v(grid.points(12), 1.0);
  v[5] = -1.0;
  CHECK_THROWS_AS(log_ito_deviation(SampledPath(grid, v), 12), Error);
}

TEST_CASE("discrete Itô identity property sweep") {
  // Random paths of many shapes, several horizons; exact at every level.
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    const double horizon = 0.25 + static_cast<double>(rng() % 8);
    const int finest = 4 + static_cast<int>(rng() % 9);
    const GridSpec grid(horizon, finest);
    const SampledPath x = trial % 2 == 0 ? generate_walk(grid, rng(), 0.1 + (rng() % 30) / 10.0, 0.5)
                                         : generate_geometric(grid, rng(), 0.5, 0.0, 1.0 + (rng() % 100));
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(finest));
    const auto I = follmer_integral(integrand_from(x, n), x, n);
    const auto qv = quadratic_variation(x, n);
    const auto xs = x.at_level(n);
    const double scale = std::max(1.0, sup_abs(xs) * sup_abs(xs));
    for (std::size_t k = 0; k < xs.size(); ++k) {
      CHECK(std::fabs(I.values[k] - (0.5 * (xs[k] * xs[k] - xs[0] * xs[0]) - 0.5 * qv.values[k])) <= 1e-12 * scale);
    }
  }
}
