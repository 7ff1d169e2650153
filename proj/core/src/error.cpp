#include "canonmap/error.hpp"

namespace canonmap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidSeed: return "InvalidSeed";
    case ErrorCode::StaleDefinition: return "StaleDefinition";
    case ErrorCode::UnknownPart: return "UnknownPart";
    case ErrorCode::MissingPart: return "MissingPart";
    case ErrorCode::MissingDepth: return "MissingDepth";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::UnreachableVertex: return "UnreachableVertex";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::DegenerateOrientation: return "DegenerateOrientation";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InsufficientPixels: return "InsufficientPixels";
    case ErrorCode::EmptyCorrespondenceSet: return "EmptyCorrespondenceSet";
    case ErrorCode::NothingVisible: return "NothingVisible";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
      return 2;
    case ErrorCode::ValidationError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidSeed:
    case ErrorCode::StaleDefinition:
    case ErrorCode::UnknownPart:
    case ErrorCode::MissingPart:
    case ErrorCode::MissingDepth:
    case ErrorCode::NonPositiveDepth:
    case ErrorCode::UnreachableVertex:
      return 3;
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::DegenerateTriangle:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::DegenerateOrientation:
    case ErrorCode::EigensolveFailure:
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::InsufficientPixels:
    case ErrorCode::EmptyCorrespondenceSet:
    case ErrorCode::NothingVisible:
      return 4;
    case ErrorCode::IoError:
      return 1;
  }
  return 1;
}

}  // namespace canonmap
