#include "pathfolio/error.hpp"

namespace pathfolio {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGrid: return "invalid_grid";
    case ErrorCode::LevelOutOfRange: return "level_out_of_range";
    case ErrorCode::IndexOutOfRange: return "index_out_of_range";
    case ErrorCode::InvalidPath: return "invalid_path";
    case ErrorCode::GridMismatch: return "grid_mismatch";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NonpositiveValue: return "nonpositive_value";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NegativeWeight: return "negative_weight";
    case ErrorCode::InvalidShares: return "invalid_shares";
    case ErrorCode::CallbackFailure: return "callback_failure";
    case ErrorCode::EmptyMeasure: return "empty_measure";
    case ErrorCode::MeasureTooLarge: return "measure_too_large";
    case ErrorCode::MissingColumn: return "missing_column";
    case ErrorCode::NonpositivePrice: return "nonpositive_price";
    case ErrorCode::UnparsableRow: return "unparsable_row";
    case ErrorCode::TooFewRows: return "too_few_rows";
    case ErrorCode::NonincreasingTime: return "nonincreasing_time";
    case ErrorCode::UnknownFixture: return "unknown_fixture";
    case ErrorCode::InvalidLevels: return "invalid_levels";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace pathfolio
