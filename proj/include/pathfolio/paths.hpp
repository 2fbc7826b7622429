#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "pathfolio/error.hpp"

namespace pathfolio {

/// Dyadic refining partitions of [0, T]. Level n has the 2^n + 1 points
/// t_k = k * T * 2^-n; level n points are a subset of level n + 1 points.
class GridSpec {
 public:
  static constexpr int kMaxLevel = 26;

  GridSpec(double horizon, int finest_level);

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] int finest_level() const noexcept { return finest_level_; }

  /// Throws LevelOutOfRange unless 1 <= level <= finest_level.
  void check_level(int level) const;

  [[nodiscard]] std::size_t points(int level) const { return intervals(level) + 1; }
  [[nodiscard]] std::size_t intervals(int level) const;
  /// Number of finest-grid steps spanned by one level-`level` step.
  [[nodiscard]] std::size_t stride(int level) const;
  [[nodiscard]] double time(int level, std::size_t k) const;
  [[nodiscard]] double step(int level) const;

  /// Same horizon, with `level` as the finest level.
  [[nodiscard]] GridSpec coarsened(int level) const;

  bool operator==(const GridSpec&) const = default;

 private:
  double horizon_;
  int finest_level_;
};

std::vector<double> grid_times(const GridSpec& grid, int level);

/// One trajectory sampled at every finest-grid time.
class SampledPath {
 public:
  SampledPath(GridSpec grid, std::vector<double> values);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] double front() const { return values_.front(); }
  [[nodiscard]] double back() const { return values_.back(); }

  /// Values at the level-`level` grid times.
  [[nodiscard]] std::vector<double> at_level(int level) const;
  /// The same trajectory viewed on a grid whose finest level is `level`.
  [[nodiscard]] SampledPath coarsened(int level) const;

  bool operator==(const SampledPath&) const = default;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// d trajectories on one grid. With `positive` set every value must be > 0.
class MultiPath {
 public:
  MultiPath(GridSpec grid, std::vector<SampledPath> assets, bool positive);
  /// Infers the grid from the first asset; `assets` must be non-empty.
  MultiPath(std::vector<SampledPath> assets, bool positive);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return assets_.size(); }
  [[nodiscard]] const SampledPath& asset(std::size_t i) const { return assets_.at(i); }
  [[nodiscard]] const std::vector<SampledPath>& assets() const noexcept { return assets_; }
  [[nodiscard]] bool positive() const noexcept { return positive_; }

  [[nodiscard]] MultiPath coarsened(int level) const;
  /// Componentwise log; requires the positivity flag.
  [[nodiscard]] MultiPath log() const;

  bool operator==(const MultiPath&) const = default;

 private:
  GridSpec grid_;
  std::vector<SampledPath> assets_;
  bool positive_;
};

/// A running quantity (quadratic variation or covariation) at level-n times.
struct VariationPath {
  GridSpec grid;
  int level;
  std::vector<double> values;
};

VariationPath quadratic_variation(const SampledPath& path, int level);

/// Direct increment-product sum of x and y over completed level-n steps.
VariationPath covariation(const SampledPath& x, const SampledPath& y, int level);

/// d x d row-major Gram matrix of level-n increment vectors summed up to the
/// level-n time with index `t_index`.
std::vector<double> covariation_matrix(const MultiPath& paths, int level, std::size_t t_index);

/// Running covariation matrices at every level-n time, flattened as
/// [t_index][i][j]. Shares one pass over the increments.
std::vector<double> covariation_matrices(const MultiPath& paths, int level);

/// X_0 = 0, increments drift * dt + sigma * sqrt(dt) * eps_k with
/// eps_k = +1 when the top bit of the k-th draw of std::mt19937_64(seed) is
/// set and -1 otherwise.
SampledPath generate_walk(const GridSpec& grid, std::uint64_t seed, double sigma, double drift);

/// s0 * exp(W) for W = generate_walk(grid, seed, sigma, drift).
SampledPath generate_geometric(const GridSpec& grid, std::uint64_t seed, double sigma, double drift,
                               double s0);

struct CsvTable {
  std::vector<std::string> column_names;  // price columns, in output order
  std::vector<double> times;              // source times, numeric
};

/// Reads a CSV price table (header row, time column first) and resamples it
/// with left-constant interpolation onto the finest level of `grid`, mapping
/// the source time span linearly onto [0, grid.horizon()]. An empty
/// `column_names` selects every price column.
MultiPath ingest_csv(std::istream& source, const std::vector<std::string>& column_names,
                     const GridSpec& grid, CsvTable* table = nullptr);

/// Parses an ISO-8601 date or date-time (UTC) or a plain real number into
/// seconds (for ISO) or the number itself.
double parse_time_field(std::string_view field);

}  // namespace pathfolio
