#pragma once

#include <stdexcept>
#include <string>

namespace lvf {

enum class ErrorKind {
  InvalidParameter,  // a value violates a positivity or range invariant
  Precondition,      // an operation was called outside its domain
  Numerical,         // a solver failed to converge or produced a rejected result
  Config,            // configuration text could not be parsed or validated
  Io
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace lvf
