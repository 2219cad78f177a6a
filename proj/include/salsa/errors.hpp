#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace salsa {

/// Failure categories raised by the numerical kernels. The CLI maps every
/// kind except the I/O and config ones to exit code 3.
enum class ErrorKind {
  RankDeficient,
  NearSingularUpdate,
  DegenerateResidual,
  ColinearPrefix,
  NumericalHealth,
  EmptyScores,
  ZeroVector,
  ZeroExactScore,
  ZeroTrueVector,
  DimensionMismatch,
  RankDeficientSketch,
  NonCausal,
  NonInvertible,
  PtildeTooLarge,
  InsufficientData,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed configuration or command-line input (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IoErrorKind { Open, BadMagic, UnsupportedVersion, TruncatedPayload, Parse, Write };

std::string_view to_string(IoErrorKind kind) noexcept;

/// File-format and filesystem failures (exit code 4).
class IoError : public std::runtime_error {
 public:
  IoError(IoErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  IoErrorKind kind() const noexcept { return kind_; }

 private:
  IoErrorKind kind_;
};

}  // namespace salsa
