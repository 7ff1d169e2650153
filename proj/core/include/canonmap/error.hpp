#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace canonmap {

enum class ErrorCode {
  ParseError,
  SchemaError,
  ValidationError,
  DimensionMismatch,
  InvalidSeed,
  StaleDefinition,
  UnknownPart,
  MissingPart,
  MissingDepth,
  NonPositiveDepth,
  UnreachableVertex,
  DegenerateGeometry,
  DegenerateTriangle,
  DegenerateConfiguration,
  DegenerateOrientation,
  EigensolveFailure,
  ConvergenceFailure,
  InsufficientPixels,
  EmptyCorrespondenceSet,
  NothingVisible,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Process exit status for an error: 2 parse, 3 validation, 4 numeric, 1 other.
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace canonmap
