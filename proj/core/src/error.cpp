#include "romfcc/error.hpp"

namespace romfcc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidConfiguration: return "invalid-configuration";
    case ErrorKind::kDegenerateBasis: return "degenerate-basis";
    case ErrorKind::kRankDeficientFit: return "rank-deficient-fit";
    case ErrorKind::kShapeError: return "shape-error";
    case ErrorKind::kInsufficientSample: return "insufficient-sample";
    case ErrorKind::kIncompleteObservation: return "incomplete-observation";
    case ErrorKind::kCannotInitialize: return "cannot-initialize";
    case ErrorKind::kNumericDegenerate: return "numeric-degenerate";
    case ErrorKind::kConstructionError: return "construction-error";
    case ErrorKind::kInvalidSeverity: return "invalid-severity";
    case ErrorKind::kUnknownPreset: return "unknown-preset";
    case ErrorKind::kIoError: return "io-error";
  }
  return "unknown-error";
}

bool is_validation_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidConfiguration:
    case ErrorKind::kInvalidSeverity:
    case ErrorKind::kUnknownPreset:
    case ErrorKind::kIoError:
      return true;
    default:
      return false;
  }
}

}  // namespace romfcc
