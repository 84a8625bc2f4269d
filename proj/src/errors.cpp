#include "mssf/errors.hpp"

namespace mssf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateConsecutivePoints: return "DuplicateConsecutivePoints";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::InvalidNaturalParams: return "InvalidNaturalParams";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::NotIdentified: return "NotIdentified";
    case ErrorCode::DegenerateState: return "DegenerateState";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::AllRunsFailed: return "AllRunsFailed";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mssf
