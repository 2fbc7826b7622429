#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathfolio/strategies.hpp"

namespace pathfolio {

inline constexpr double kMarginTolerance = 1e-10;
/// Residuals at or below this are treated as converged by the monotone test.
inline constexpr double kResidualFloor = 1e-12;

/// Signed comparison of two series; margin >= 0 means the inequality holds.
struct InequalityReport {
  std::string name;
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> margins;
  double min_margin = 0.0;
  double scale = 1.0;  // max(1, |lhs|, |rhs|)
  bool pass = true;    // min_margin >= -kMarginTolerance * scale
  std::string note;
  /// variance_bound only: sup_t |QV(log V^pi)_t - pi^T C_t pi|.
  std::optional<double> cross_check_deviation;
};

struct ConvergenceReport {
  std::string name;
  std::vector<int> levels;
  std::vector<double> residuals;
  bool monotone_decrease = false;
};

/// Test hook: inflates the off-diagonal covariations fed to the inequality
/// checks, which must then fail for any non-vertex weights.
struct VerifyOptions {
  bool corrupt_qv = false;
};

InequalityReport check_geometric_mean_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                            const VerifyOptions& options = {});
/// Finite-horizon form: part (1) margins divided by t, for t > 0.
InequalityReport check_growth_rate(const SimplexWeights& pi, const MultiPath& s, int level,
                                   const VerifyOptions& options = {});
InequalityReport check_variance_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                      const VerifyOptions& options = {});
InequalityReport check_volatility_bound(const SimplexWeights& pi, const MultiPath& s, int level,
                                        const VerifyOptions& options = {});

/// Strictly decreasing, except that consecutive residuals at or below
/// kResidualFloor count as converged.
bool is_monotone_decrease(std::span<const double> residuals);

/// Throws InvalidLevels unless `levels` is non-empty, strictly increasing
/// and inside [1, finest_level].
void validate_levels(std::span<const int> levels, int finest_level);

/// Residual diagnostics across levels: Itô formula (f = exp on log S^1),
/// exponential ODE (log S^1), log-Itô identity (S^1), self-financing
/// (equal-weight CRP) and universal consistency (Dirichlet k = 200, seed 7).
std::vector<ConvergenceReport> convergence_suite(const MultiPath& s, std::span<const int> levels);
std::vector<ConvergenceReport> convergence_suite(const std::string& fixture, std::span<const int> levels);

/// Named fixtures: "constant", "geometric" (d = 2, sigma 0.2 / 0.35) and
/// "geometric3" (d = 3); all T = 1, N = 12.
MultiPath make_fixture(const std::string& name);

struct GeometricSpec {
  double sigma;
  double drift = 0.0;
  double s0 = 100.0;
  std::uint64_t seed = 1;
};

MultiPath geometric_market(const GridSpec& grid, std::span<const GeometricSpec> assets);

struct VerificationRun {
  std::vector<InequalityReport> inequalities;
  std::vector<ConvergenceReport> convergence;

  [[nodiscard]] bool passed() const;
};

VerificationRun run_verification(const MultiPath& s, const SimplexWeights& pi, int level,
                                 std::span<const int> levels, const VerifyOptions& options = {});

}  // namespace pathfolio
