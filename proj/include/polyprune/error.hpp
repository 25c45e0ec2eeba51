#pragma once

#include <stdexcept>
#include <string>

namespace polyprune {

enum class ErrorCode {
  InvalidInput,
  CatalogMismatch,
  InvalidScale,
  ShapeMismatch,
  OutOfBounds,
  MissingDisk,
  InsufficientHistory,
  NoPrunePoint,
  LocalizationFailed,
  DegenerateGeometry,
  NoTargetTissue,
  Io,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type so callers can branch on
// code() without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polyprune
