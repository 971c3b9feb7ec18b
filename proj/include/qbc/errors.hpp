#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace qbc {

// Error categories map onto CLI exit codes: validation -> 2, solver -> 3,
// dimension cap -> 4.
enum class ErrorKind { Validation, Solver, DimensionCap };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void throw_validation(const std::string& code, const std::string& what) {
  throw Error(ErrorKind::Validation, code, what);
}

[[noreturn]] inline void throw_solver(const std::string& code, const std::string& what) {
  throw Error(ErrorKind::Solver, code, what);
}

[[noreturn]] inline void throw_dim_cap(const std::string& what) {
  throw Error(ErrorKind::DimensionCap, "DimensionCapExceeded", what);
}

}  // namespace qbc
