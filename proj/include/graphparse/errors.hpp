#ifndef GRAPHPARSE_ERRORS_HPP_
#define GRAPHPARSE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace graphparse {

// Malformed query text. `span` is the offending fragment.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::string span)
      : std::runtime_error(message + " at '" + span + "'"), span_(std::move(span)) {}
  const std::string& span() const { return span_; }

 private:
  std::string span_;
};

// Caller broke a documented precondition (shape mismatch, misuse of the tape).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A configured size limit was exceeded (variable count, sequence length).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: corpus lines, gold queries, vocabulary drift.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or parameters during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphparse

#endif  // GRAPHPARSE_ERRORS_HPP_
