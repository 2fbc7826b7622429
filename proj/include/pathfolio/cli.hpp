#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathfolio/paths.hpp"

namespace pathfolio::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// A configuration problem tied to one config key / CLI flag.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error("'" + key + "': " + message), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
  double horizon = 1.0;
  int finest_level = 12;
  int level = 0;  // 0 means "same as finest_level"
  std::uint64_t seed = 7;
  /// geometric:d=2,sigma=0.2/0.35,drift=0,s0=100 | constant:d=2,value=1 | csv:<path>
  std::string assets = "geometric:d=2,sigma=0.2/0.35,drift=0,s0=100";
  std::vector<std::string> columns;  // CSV column selection; empty = all
  /// equal | constant:w1,w2,... | cppi:alpha=0.8,m=3,r=0 | universal
  std::string strategy;
  std::string measure = "dirichlet:k=500,seed=7";
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  std::vector<int> levels = {8, 10, 12};
  bool inject_fault = false;

  [[nodiscard]] int working_level() const noexcept { return level == 0 ? finest_level : level; }
  /// Checks n <= N and that referenced files exist.
  void validate() const;
};

/// Builds the market named by config.assets on the configured grid.
MultiPath load_assets(const RunConfig& config, std::vector<std::string>* names = nullptr);

int cmd_simulate(const RunConfig& config, std::ostream& err);
int cmd_cppi(const RunConfig& config, std::ostream& err);
int cmd_universal(const RunConfig& config, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& err);
int cmd_ingest(const RunConfig& config, std::ostream& err);

/// Full command line entry point (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace pathfolio::cli
