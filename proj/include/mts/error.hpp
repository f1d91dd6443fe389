#pragma once

#include <stdexcept>
#include <string>

namespace mts {

// Every recoverable failure in the library is reported as an mts::Error. The
// message text is stable and is matched by the CLI and the tests.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InfeasibleError : public Error {
 public:
  InfeasibleError() : Error("infeasible") {}
};

class UnboundedError : public Error {
 public:
  UnboundedError() : Error("unbounded") {}
};

}  // namespace mts
