#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace visitlab {

enum class ErrorKind {
  invalid_spec,
  invalid_input,
  structure,
  non_stationary,
  shape,
  insufficient_data,
  numeric,
  degenerate,
  unsupported,
  exactness,
  parameter,
  resource,
  config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an estimator sees fewer observations than it needs.
class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& what, std::uint64_t count)
      : Error(ErrorKind::insufficient_data,
              what + " (observed " + std::to_string(count) + ")"),
        count_(count) {}

  std::uint64_t count() const noexcept { return count_; }

 private:
  std::uint64_t count_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace visitlab
