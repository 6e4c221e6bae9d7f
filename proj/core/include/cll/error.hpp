#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cll {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric argument is outside the domain of the function (NaN, inf, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A label index is outside [0, K).
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A candidate set is empty, equal to the full label set, unsorted or
/// contains duplicates.
class InvalidCandidateSet : public Error {
 public:
  using Error::Error;
};

/// The surrogate has no derivative (0-1 loss).
class UnsupportedGradient : public Error {
 public:
  using Error::Error;
};

/// Generic input validation failure (bad N, bad simplex, bad config, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Examples carry different candidate-set sizes while the caller asked for
/// a fixed-N computation.
class HeterogeneousDataset : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// NaN or Inf appeared in the loss or parameters during training.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Malformed binary input. `offset` is the byte position where parsing
/// stopped.
class ParseError : public Error {
 public:
  enum class Kind { bad_magic, unsupported_dtype, truncated_header, truncated_payload, trailing_bytes, bad_dims };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

}  // namespace cll
