#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stst {

// Parameter outside its mathematical domain (delta, variance, drift, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stopping rule whose tau coincides with theta.
class DegenerateRuleError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Calibration scores have zero spread; no stopping rule can be derived.
class DegenerateDataError : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejection sampling kept no trial; widen the band or raise the trial count.
class InsufficientAcceptanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stst
