#include "polyprune/error.hpp"

namespace polyprune {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid input";
    case ErrorCode::CatalogMismatch: return "catalog mismatch";
    case ErrorCode::InvalidScale: return "invalid scale";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::OutOfBounds: return "out of bounds";
    case ErrorCode::MissingDisk: return "missing disk";
    case ErrorCode::InsufficientHistory: return "insufficient history";
    case ErrorCode::NoPrunePoint: return "no prune point";
    case ErrorCode::LocalizationFailed: return "localization failed";
    case ErrorCode::DegenerateGeometry: return "degenerate geometry";
    case ErrorCode::NoTargetTissue: return "no target tissue";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace polyprune
