#pragma once

#include <stdexcept>
#include <string>

namespace tproj {

enum class ErrorCode {
  invalid_argument,  // bad dimensions, parameters or configuration
  numerics,          // overflow, non-convergence, singular solve
  synthesis,         // gain design failed
  projection,        // time-projection block system degenerate
  infeasible,        // gait or feasibility problem has no solution
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace tproj
