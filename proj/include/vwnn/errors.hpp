#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vwnn {

/// Operand extents do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-supplied argument is outside its allowed domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition tying two values together was broken (e.g. a forward cache
/// handed to the backward pass of a different layer).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed model file. `offset()` is the byte position where decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// CSV header does not match the expected attribute set.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A data row holds a value that cannot be parsed.
class RowError : public std::runtime_error {
 public:
  RowError(std::size_t row, const std::string& field, const std::string& detail)
      : std::runtime_error("row " + std::to_string(row) + ", field '" + field + "': " + detail),
        row_(row),
        field_(field) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

/// Filesystem read/write failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vwnn
