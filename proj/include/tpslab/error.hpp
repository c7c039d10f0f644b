#pragma once

#include <stdexcept>
#include <string>

namespace tpslab {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NotHermitian,
  NotUnitary,
  NotOrthonormal,
  DegenerateLabels,
  NonCommuting,
  GridIncompatible,
  Config,
  NumericalGuard,
  Io,
};

/// Every failure the library reports is an Error; the kind maps 1:1 onto
/// the status codes of the C API.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tpslab
