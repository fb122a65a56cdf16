#pragma once

#include <stdexcept>
#include <string>

namespace pedrecon {

/// Failure categories. The CLI maps each one to a fixed exit code.
enum class ErrorKind {
  io = 3,             // missing or unreadable file
  format = 4,         // malformed header or record
  invalid_input = 5,  // precondition on values violated
  degenerate = 6,     // numerically degenerate configuration
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::invalid_input, what);
}

}  // namespace pedrecon
