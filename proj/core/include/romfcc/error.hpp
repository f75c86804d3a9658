#pragma once

#include <stdexcept>
#include <string>

namespace romfcc {

enum class ErrorKind {
  kInvalidConfiguration,
  kDegenerateBasis,
  kRankDeficientFit,
  kShapeError,
  kInsufficientSample,
  kIncompleteObservation,
  kCannotInitialize,
  kNumericDegenerate,
  kConstructionError,
  kInvalidSeverity,
  kUnknownPreset,
  kIoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// True for errors caused by bad user input (configuration, presets, files)
/// rather than by the data or the numerics.
bool is_validation_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace romfcc
