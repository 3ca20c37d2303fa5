#pragma once

#include <stdexcept>
#include <string>

namespace ccagrade {

/// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad inputs: shapes, files, configs. CLI maps these to exit code 1.
struct InvalidInput : Error {
  using Error::Error;
};

/// Numerical breakdowns. CLI maps these to exit code 2.
struct NumericalFailure : Error {
  using Error::Error;
};

struct SampleMismatch : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct DegenerateInput : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct ShapeMismatch : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct InvalidMixing : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct DimTooLarge : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct InvalidSpec : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct SingularModelCovariance : NumericalFailure {
  using NumericalFailure::NumericalFailure;
};

struct IoError : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct MalformedLine : InvalidInput {
  MalformedLine(const std::string& what, long line)
      : InvalidInput(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  long line_number;
};

struct DimensionMismatch : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct EmptyFile : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct EmptyAfterEmbedding : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct MalformedRow : InvalidInput {
  MalformedRow(const std::string& what, long row)
      : InvalidInput(what + " (row " + std::to_string(row) + ")"), row_number(row) {}
  long row_number;
};

struct MissingColumn : InvalidInput {
  using InvalidInput::InvalidInput;
};

}  // namespace ccagrade
