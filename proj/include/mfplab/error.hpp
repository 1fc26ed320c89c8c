#pragma once

#include <stdexcept>
#include <string>

namespace mfplab {

/// Base error for everything thrown by this library.
///
/// `code()` is a short stable token (e.g. "bundle.missing_file") that the CLI
/// prints as the machine-readable part of its one-line failure message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class LoadError : public Error {
 public:
  explicit LoadError(const std::string& message) : Error("bundle.load", message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error("numerical", message) {}
};

}  // namespace mfplab
