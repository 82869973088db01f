#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wmb {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridResolutionError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class StabilityError : public Error {
 public:
  using Error::Error;
};

class DensityFormatError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class MemoryGuardError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class UnsupportedPower : public Error {
 public:
  using Error::Error;
};

class SeedError : public Error {
 public:
  using Error::Error;
};

class IncompatibleRuns : public Error {
 public:
  using Error::Error;
};

class MissingQuantity : public Error {
 public:
  MissingQuantity(const std::string& quantity, std::vector<std::string> available);
  const std::vector<std::string>& available() const { return available_; }

 private:
  std::vector<std::string> available_;
};

/// Parse failure in the observable grammar; `position` is a zero-based column.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// A basis cannot represent one or more mixture components.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& message, std::vector<double> residuals);
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Config validation failure; `pointer` is a JSON pointer into the document.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace wmb
