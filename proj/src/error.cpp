#include "orbit/error.hpp"

namespace orbit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::UnsupportedTask: return "UNSUPPORTED_TASK";
    case ErrorCode::ZeroEpsilon: return "ZERO_EPSILON";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::InvalidInterval: return "INVALID_INTERVAL";
    case ErrorCode::Infeasible: return "INFEASIBLE";
    case ErrorCode::NonSpd: return "NON_SPD";
    case ErrorCode::MarginNotMet: return "MARGIN_NOT_MET";
    case ErrorCode::InvalidGamma: return "INVALID_GAMMA";
    case ErrorCode::DegenerateMargin: return "DEGENERATE_MARGIN";
    case ErrorCode::TooLarge: return "TOO_LARGE";
    case ErrorCode::ConfigUnstable: return "CONFIG_UNSTABLE";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::BadMagic: return "BAD_MAGIC";
    case ErrorCode::CountMismatch: return "COUNT_MISMATCH";
    case ErrorCode::Io: return "IO";
  }
  return "UNKNOWN";
}

}  // namespace orbit
