#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace codedsketch {

enum class ErrorCode {
  parameter,
  partition,
  configuration,
  insufficient_samples,
  numerical_failure,
  starvation,
  io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every error raised by the library. The code drives the C API
/// status and the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorCode::parameter, what) {}
};

class PartitionError : public Error {
 public:
  explicit PartitionError(const std::string& what)
      : Error(ErrorCode::partition, what) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorCode::configuration, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

/// Fewer samples than the interpolation degree requires.
class InsufficientSamplesError : public Error {
 public:
  InsufficientSamplesError(std::size_t shortfall, const std::string& what)
      : Error(ErrorCode::insufficient_samples, what), shortfall_(shortfall) {}

  std::size_t shortfall() const noexcept { return shortfall_; }

 private:
  std::size_t shortfall_;
};

/// Decoding produced an imaginary residue too large to discard.
class NumericalFailureError : public Error {
 public:
  NumericalFailureError(double residue, const std::string& what)
      : Error(ErrorCode::numerical_failure, what), residue_(residue) {}

  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

/// Not enough live workers to deliver the requested number of results.
class StarvationError : public Error {
 public:
  StarvationError(std::size_t shortfall, const std::string& what)
      : Error(ErrorCode::starvation, what), shortfall_(shortfall) {}

  std::size_t shortfall() const noexcept { return shortfall_; }

 private:
  std::size_t shortfall_;
};

}  // namespace codedsketch
