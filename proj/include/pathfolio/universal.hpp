#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "pathfolio/strategies.hpp"

namespace pathfolio {

struct SimplexAtom {
  SimplexWeights point;
  double weight;
};

/// A probability measure on the simplex with finitely many atoms.
class DiscreteSimplexMeasure {
 public:
  static constexpr double kWeightTolerance = 1e-12;

  explicit DiscreteSimplexMeasure(std::vector<SimplexAtom> atoms);

  [[nodiscard]] const std::vector<SimplexAtom>& atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return atoms_.front().point.dimension(); }

 private:
  std::vector<SimplexAtom> atoms_;
};

/// k equally weighted atoms, uniform on the simplex. Each atom normalizes d
/// standard exponentials -log(1 - u), u = (draw >> 11) * 2^-53 from
/// std::mt19937_64(seed).
DiscreteSimplexMeasure measure_uniform_dirichlet(std::size_t d, std::size_t k, std::uint64_t seed);

inline constexpr std::size_t kDefaultGridAtomCap = 2'000'000;

/// Every composition of `resolution` into d parts, scaled by 1/resolution,
/// equally weighted; C(resolution + d - 1, d - 1) atoms.
DiscreteSimplexMeasure measure_grid(std::size_t d, std::size_t resolution,
                                    std::size_t atom_cap = kDefaultGridAtomCap);

/// CSV rows `w,pi^1,...,pi^d` without a header. Weights are normalized to
/// sum to 1; each point must lie in the simplex to 1e-9 and is renormalized.
DiscreteSimplexMeasure measure_from_csv(std::istream& in);

/// Parses `dirichlet:k=500,seed=7`, `grid:resolution=50` or `file:<path>`.
DiscreteSimplexMeasure parse_measure_spec(const std::string& spec, std::size_t d);

struct UniversalResult {
  SampledPath v_hat;
  StrategyPath pi_hat;
  std::vector<SampledPath> atom_values;
};

/// V_hat = sum_k w_k V^{pi_k}, pi_hat = sum_k w_k pi_k V^{pi_k} / V_hat.
/// Atom values come from the constant rebalanced closed form; reductions run
/// in atom order.
UniversalResult universal_portfolio(const DiscreteSimplexMeasure& mu, const MultiPath& s, int level);

/// sup_t |portfolio_value(pi_hat)_t - V_hat_t| / V_hat_t.
double universal_consistency_residual(const UniversalResult& result, const MultiPath& s, int level);

}  // namespace pathfolio
