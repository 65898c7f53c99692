#pragma once

#include <stdexcept>
#include <string>

namespace rieszlab {

/// Classifies every failure the library can signal. The CLI maps these onto
/// its exit codes.
enum class ErrorKind {
  InvalidArgument,
  Singular,
  OutOfDomain,
  NonFinite,
  QuadratureFailure,
  BudgetExhausted,
  OrderExhausted,
  ShapeMismatch,
  StrategyDisagreement,
  SearchFailure,
  GridTooCoarse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace rieszlab
