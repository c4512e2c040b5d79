#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace walkup {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingLandmark : public Error {
 public:
  explicit MissingLandmark(std::size_t index)
      : Error("MissingLandmark: landmark " + std::to_string(index) + " absent or below visibility threshold"),
        index_(index) {}

  [[nodiscard]] std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class DegenerateVector : public Error {
 public:
  DegenerateVector() : Error("DegenerateVector: vector norm at or below epsilon") {}
};

class UnreadableInput : public Error {
 public:
  explicit UnreadableInput(const std::string& what) : Error("UnreadableInput: " + what) {}
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& reason)
      : Error("SchemaError at line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class EmptySequence : public Error {
 public:
  EmptySequence() : Error("EmptySequence: no frames") {}
};

class SequenceTooShort : public Error {
 public:
  explicit SequenceTooShort(const std::string& what) : Error("SequenceTooShort: " + what) {}
};

class SeriesTooShort : public Error {
 public:
  explicit SeriesTooShort(std::size_t n)
      : Error("SeriesTooShort: need at least 3 samples, got " + std::to_string(n)) {}
};

class EmptySeries : public Error {
 public:
  EmptySeries() : Error("EmptySeries: no samples") {}
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& what) : Error("InvalidConfig: " + what) {}
};

}  // namespace walkup
