// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [scratch-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pathfolio/calculus.hpp"
#include "pathfolio/cli.hpp"
#include "pathfolio/universal.hpp"
#include "pathfolio/verify.hpp"

using namespace pathfolio;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

SimplexWeights random_simplex(std::mt19937_64& rng, std::size_t d) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(d);
  double s = 0.0;
  for (double& v : w) s += (v = ex(rng));
  for (double& v : w) v /= s;
  return SimplexWeights(w);
}

MultiPath geometric3(std::uint64_t seed, int finest) {
  const GridSpec grid(1.0, finest);
  const GeometricSpec specs[] = {{0.2, 0.05, 100.0, seed}, {0.3, 0.0, 40.0, seed + 1}, {0.25, -0.05, 75.0, seed + 2}};
  return geometric_market(grid, specs);
}

SampledPath log_path(const SampledPath& s) {
  std::vector<double> v(s.values().begin(), s.values().end());
  for (double& x : v) x = std::log(x);
  return SampledPath(s.grid(), v);
}

bool strictly_decreasing(const std::vector<double>& r) {
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] < r[i - 1])) return false;
  }
  return true;
}

// 1. Discrete Itô identity, 1e-12 absolute; timing at N = 14.
Verdict criterion1() {
  Verdict v;
  const GridSpec grid(1.0, 14);
  std::vector<SampledPath> paths = {generate_walk(grid, 1, 1.0, 0.0), generate_walk(grid, 2, 0.3, 2.0),
                                    log_path(generate_geometric(grid, 3, 0.5, 0.1, 20.0)),
                                    generate_walk(GridSpec(1.0, 14), 4, 2.0, -1.0)};
  double worst = 0.0;
  double slowest = 0.0;
  for (const auto& x : paths) {
    const auto start = Clock::now();
    for (int n = 1; n <= 14; ++n) {
      const IntegralPath I = follmer_integral(IntegrandPath(grid, n, 1, x.at_level(n)), x, n);
      const VariationPath qv = quadratic_variation(x, n);
      const std::vector<double> xs = x.at_level(n);
      for (std::size_t k = 0; k < xs.size(); ++k) {
        worst = std::max(worst, std::fabs(I.values[k] - (0.5 * (xs[k] * xs[k] - xs[0] * xs[0]) - 0.5 * qv.values[k])));
      }
    }
    slowest = std::max(slowest, seconds_since(start));
  }
  v.detail << "max |int X dX - ((X_t^2 - X_0^2)/2 - QV/2)| = " << worst << " over 4 paths, levels 1..14; "
           << "slowest path (all 14 levels) " << slowest << " s";
  v.require(worst <= 1e-12, "identity > 1e-12");
  v.require(slowest < 1.0, "runtime >= 1 s");
  return v;
}

// 2. Inversion identities.
Verdict criterion2() {
  Verdict v;
  double exp_of_log = 0.0;
  for (const char* name : {"geometric", "geometric3"}) {
    const MultiPath s = make_fixture(name);
    for (const auto& a : s.assets()) {
      for (int n = 1; n <= 12; ++n) exp_of_log = std::max(exp_of_log, inversion_check(a, n).exp_of_log);
    }
  }
  v.detail << "E(L(Y)) rel. dev. " << exp_of_log << " (all fixture assets, levels 1..12); L(E(X)) dev. at 8/10/12:";
  v.require(exp_of_log <= 1e-10, "E(L(Y)) > 1e-10");

  const GridSpec grid(1.0, 12);
  std::vector<SampledPath> xs = {generate_walk(grid, 7, 1.0, 0.0)};
  const MultiPath fixture = make_fixture("geometric");
  for (const auto& a : fixture.assets()) xs.push_back(log_path(a));
  for (const auto& x : xs) {
    std::vector<double> dev;
    for (int n : {8, 10, 12}) dev.push_back(inversion_check(x, n).log_of_exp);
    v.detail << " (" << dev[0] << ", " << dev[1] << ", " << dev[2] << ")";
    v.require(strictly_decreasing(dev), "L(E(X)) not strictly decreasing");
  }
  return v;
}

// 3. Itô formula residuals.
Verdict criterion3() {
  Verdict v;
  const GridSpec grid(1.0, 12);
  const SmoothFunction exp_fn{
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::exp(x[0]); },
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{std::exp(x[0])}; },
      {}};
  const SmoothFunction half_square{
      [](SmoothFunction::Point x, SmoothFunction::Point) { return 0.5 * x[0] * x[0]; },
      [](SmoothFunction::Point x, SmoothFunction::Point) { return std::vector<double>{x[0]}; },
      [](SmoothFunction::Point, SmoothFunction::Point) { return std::vector<double>{1.0}; },
      {}};
  v.detail << "exp residual level 8 / 12:";
  double square = 0.0;
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    const MultiPath w(grid, {generate_walk(grid, seed, 1.0, 0.0)}, false);
    const double r8 = ito_formula_residual(exp_fn, w, 8);
    const double r12 = ito_formula_residual(exp_fn, w, 12);
    v.detail << " (" << r8 << ", " << r12 << ")";
    v.require(r12 < r8, "exp residual did not decrease");
    v.require(r8 < 0.05 && r12 < 0.05, "exp residual >= 0.05");
    for (int n = 1; n <= 12; ++n) square = std::max(square, ito_formula_residual(half_square, w, n));
  }
  v.detail << "; x^2/2 residual max over levels 1..12 = " << square;
  v.require(square <= 1e-12, "x^2/2 residual > 1e-12");
  return v;
}

// 4. Self-financing residual, 20 random strategies, d = 3.
Verdict criterion4() {
  Verdict v;
  std::mt19937_64 rng(404);
  std::exponential_distribution<double> ex(1.0);
  int monotone = 0;
  double worst12 = 0.0;
  for (int c = 0; c < 20; ++c) {
    const MultiPath s = geometric3(1000 + 3 * static_cast<std::uint64_t>(c), 12);
    const GridSpec& grid = s.grid();
    // Even cases: constant weights. Odd cases: weights moving linearly
    // between two random points of the simplex.
    const SimplexWeights a = random_simplex(rng, 3);
    const SimplexWeights b = c % 2 == 0 ? a : random_simplex(rng, 3);
    std::vector<double> residuals;
    for (int n : {8, 10, 12}) {
      std::vector<double> rows;
      for (std::size_t k = 0; k < grid.points(n); ++k) {
        const double t = grid.time(n, k) / grid.horizon();
        for (std::size_t i = 0; i < 3; ++i) rows.push_back((1.0 - t) * a[i] + t * b[i]);
      }
      const StrategyPath pi(grid, n, 3, rows, WeightMode::Simplex);
      residuals.push_back(self_financing_residual(strategy_to_shares(pi, s, n), s));
    }
    if (strictly_decreasing(residuals)) ++monotone;
    worst12 = std::max(worst12, residuals.back());
  }
  v.detail << monotone << "/20 strategies (10 constant, 10 time-varying) decrease across 8 -> 10 -> 12; "
           << "max level-12 residual " << worst12;
  v.require(monotone == 20, "some case not monotone");
  return v;
}

// 5. Universal portfolio consistency.
Verdict criterion5() {
  Verdict v;
  const auto start = Clock::now();
  const int levels[] = {8, 10, 12};
  const DiscreteSimplexMeasure mu = measure_uniform_dirichlet(2, 200, 7);
  const GridSpec grid(1.0, 12);
  struct Fixture {
    const char* label;
    double s1, s2;
  };
  for (const Fixture& f : {Fixture{"sigma 0.2/0.35", 0.2, 0.35}, Fixture{"sigma 0.2/0.2", 0.2, 0.2},
                           Fixture{"sigma 0.35/0.35", 0.35, 0.35}}) {
    const GeometricSpec specs[] = {{f.s1, 0.0, 100.0, 101}, {f.s2, 0.0, 50.0, 202}};
    const MultiPath s = geometric_market(grid, specs);
    std::vector<double> r;
    for (int n : levels) r.push_back(universal_consistency_residual(universal_portfolio(mu, s, n), s, n));
    v.detail << f.label << ": " << r[0] << " / " << r[1] << " / " << r[2] << "; ";
    v.require(r[2] < r[0], std::string(f.label) + " residual(12) >= residual(8)");
    v.require(r[2] < 1e-2, std::string(f.label) + " residual(12) >= 1e-2");
  }
  std::mt19937_64 rng(55);
  const MultiPath s = make_fixture("geometric");
  double single = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteSimplexMeasure one({{random_simplex(rng, 2), 1.0}});
    for (int n : levels) single = std::max(single, universal_consistency_residual(universal_portfolio(one, s, n), s, n));
  }
  const double elapsed = seconds_since(start);
  v.detail << "single-atom max " << single << "; " << elapsed << " s";
  v.require(single <= 1e-10, "single-atom residual > 1e-10");
  v.require(elapsed < 10.0, "runtime >= 10 s");
  return v;
}

// 6. Inequalities: >= 100 random weights x 5 seeds, d = 3, level 10.
Verdict criterion6() {
  Verdict v;
  const auto start = Clock::now();
  std::mt19937_64 rng(606);
  std::size_t evaluated = 0;
  double worst_ratio = 0.0;  // most negative margin / scale
  for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
    const MultiPath s = geometric3(seed, 10);
    for (int trial = 0; trial < 100; ++trial) {
      const SimplexWeights pi = random_simplex(rng, 3);
      for (const auto& r : {check_geometric_mean_bound(pi, s, 10), check_growth_rate(pi, s, 10),
                            check_variance_bound(pi, s, 10), check_volatility_bound(pi, s, 10)}) {
        for (std::size_t k = 0; k < r.margins.size(); ++k) {
          const double scale = std::max({1.0, std::fabs(r.lhs[k]), std::fabs(r.rhs[k])});
          worst_ratio = std::min(worst_ratio, r.margins[k] / scale);
          ++evaluated;
        }
        v.require(r.pass, r.name + " pass flag false");
      }
    }
  }
  v.require(worst_ratio >= -1e-10, "margin below -1e-10 * scale");

  double vertex = 0.0;
  for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
    const MultiPath s = geometric3(seed, 10);
    for (std::size_t i = 0; i < 3; ++i) {
      const SimplexWeights e = SimplexWeights::vertex(3, i);
      for (const auto& r : {check_geometric_mean_bound(e, s, 10), check_growth_rate(e, s, 10),
                            check_variance_bound(e, s, 10), check_volatility_bound(e, s, 10)}) {
        for (double m : r.margins) vertex = std::max(vertex, std::fabs(m));
      }
    }
  }
  double collinear = 0.0;
  const GridSpec grid(1.0, 10);
  const SampledPath base = generate_geometric(grid, 77, 0.3, 0.0, 2.0);
  std::vector<double> sq(base.size()), cube(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    sq[k] = base[k] * base[k];
    cube[k] = sq[k] * base[k];
  }
  const MultiPath ray(grid, {base, SampledPath(grid, sq), SampledPath(grid, cube)}, true);
  for (int trial = 0; trial < 100; ++trial) {
    for (double m : check_volatility_bound(random_simplex(rng, 3), ray, 10).margins) collinear = std::max(collinear, std::fabs(m));
  }
  const double elapsed = seconds_since(start);
  v.detail << evaluated << " margins (500 weights x 5 seeds x 4 checks), worst margin/scale " << worst_ratio
           << "; vertex equality max " << vertex << "; collinear equality max " << collinear << "; " << elapsed << " s";
  v.require(vertex <= 1e-12, "vertex margins > 1e-12");
  v.require(collinear <= 1e-12, "collinear margins > 1e-12");
  v.require(elapsed < 30.0, "runtime >= 30 s");
  return v;
}

// 7. CPPI floor, cushion identity, m = 1 closed form.
Verdict criterion7() {
  Verdict v;
  const GridSpec grid(1.0, 12);
  const double alpha = 0.8;
  const double rate = 0.01;
  double floor_min = std::numeric_limits<double>::infinity();
  double cushion_dev = 0.0;
  double closed_dev = 0.0;
  for (std::uint64_t seed : {17u, 18u, 19u}) {
    const SampledPath s = generate_geometric(grid, seed, 0.3, 0.0, 100.0);
    const auto p = s.at_level(12);
    for (double m : {0.5, 1.0, 3.0}) {
      const CppiResult r = cppi({alpha, m, rate}, s, 12);
      for (std::size_t k = 0; k < r.value.size(); ++k) {
        floor_min = std::min(floor_min, r.value[k] - alpha * r.money_market[k]);
        cushion_dev = std::max(cushion_dev, std::fabs(r.weights.row(k)[0] * r.value[k] - m * r.cushion[k]));
        if (m == 1.0) {
          const double b = std::exp(rate * grid.time(12, k));
          closed_dev = std::max(closed_dev, std::fabs(r.value[k] - ((1.0 - alpha) * p[k] / p[0] + alpha * b)));
        }
      }
    }
  }
  v.detail << "min (V - alpha B) = " << floor_min << "; max |pi1 V - m C| = " << cushion_dev
           << "; m = 1 closed-form dev " << closed_dev << " (alpha 0.8, m 0.5/1/3, 3 seeds)";
  v.require(floor_min >= 0.0, "floor violated");
  v.require(cushion_dev <= 1e-12, "cushion identity > 1e-12");
  v.require(closed_dev <= 1e-12, "m = 1 closed form > 1e-12");
  return v;
}

// 8. Determinism and lossless price round trip.
Verdict criterion8(const fs::path& scratch) {
  Verdict v;
  const fs::path a = scratch / "run_a";
  const fs::path b = scratch / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto simulate = [](const fs::path& out) {
    cli::RunConfig config;
    config.assets = "geometric:d=3,sigma=0.2/0.3/0.25,s0=100/40/75";
    config.strategy = "constant:0.2,0.3,0.5";
    config.seed = 2024;
    config.out = out.string();
    std::ostringstream err;
    return cli::cmd_simulate(config, err);
  };
  v.require(simulate(a) == 0 && simulate(b) == 0, "cmd_simulate failed");
  std::size_t identical = 0;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    if (slurp(entry.path()) == slurp(b / entry.path().filename())) ++identical;
  }
  v.require(files == 5 && identical == files, "outputs differ");

  cli::RunConfig original;
  original.assets = "geometric:d=3,sigma=0.2/0.3/0.25,s0=100/40/75";
  original.seed = 2024;
  cli::RunConfig reread;
  reread.assets = "csv:" + (a / "prices.csv").string();
  const bool lossless = cli::load_assets(reread) == cli::load_assets(original);
  v.detail << identical << "/" << files << " output files byte-identical; re-ingested prices "
           << (lossless ? "identical" : "differ");
  v.require(lossless, "re-ingest not lossless");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "pathfolio_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"discrete Ito identity", criterion1},
      {"E/L inversion", criterion2},
      {"Ito formula residual", criterion3},
      {"self-financing correspondence", criterion4},
      {"universal portfolio consistency", criterion5},
      {"CRP inequalities", criterion6},
      {"CPPI floor and cushion", criterion7},
      {"determinism and I/O", [&] { return criterion8(scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    if (!v.pass) ++failures;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
