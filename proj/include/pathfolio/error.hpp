#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathfolio {

enum class ErrorCode {
  InvalidGrid,
  LevelOutOfRange,
  IndexOutOfRange,
  InvalidPath,
  GridMismatch,
  DimensionMismatch,
  NonpositiveValue,
  InvalidArgument,
  NegativeWeight,
  InvalidShares,
  CallbackFailure,
  EmptyMeasure,
  MeasureTooLarge,
  // CSV ingestion
  MissingColumn,
  NonpositivePrice,
  UnparsableRow,
  TooFewRows,
  NonincreasingTime,
  // verification
  UnknownFixture,
  InvalidLevels,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on the kind of failure rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pathfolio
