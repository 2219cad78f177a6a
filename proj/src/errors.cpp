#include "salsa/errors.hpp"

namespace salsa {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NearSingularUpdate: return "NearSingularUpdate";
    case ErrorKind::DegenerateResidual: return "DegenerateResidual";
    case ErrorKind::ColinearPrefix: return "ColinearPrefix";
    case ErrorKind::NumericalHealth: return "NumericalHealth";
    case ErrorKind::EmptyScores: return "EmptyScores";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::ZeroExactScore: return "ZeroExactScore";
    case ErrorKind::ZeroTrueVector: return "ZeroTrueVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RankDeficientSketch: return "RankDeficientSketch";
    case ErrorKind::NonCausal: return "NonCausal";
    case ErrorKind::NonInvertible: return "NonInvertible";
    case ErrorKind::PtildeTooLarge: return "PtildeTooLarge";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(IoErrorKind kind) noexcept {
  switch (kind) {
    case IoErrorKind::Open: return "Open";
    case IoErrorKind::BadMagic: return "BadMagic";
    case IoErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case IoErrorKind::TruncatedPayload: return "TruncatedPayload";
    case IoErrorKind::Parse: return "ParseError";
    case IoErrorKind::Write: return "Write";
  }
  return "Unknown";
}

}  // namespace salsa
