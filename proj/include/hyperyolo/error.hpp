#pragma once

#include <stdexcept>
#include <string>

namespace hyperyolo {

enum class ErrorKind {
  shape_mismatch,
  invalid_argument,
  format,
  io,
};

// All library failures surface as this exception; `kind()` lets callers map
// them to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace detail
}  // namespace hyperyolo
