#pragma once

#include <stdexcept>
#include <string>

namespace unilift {

enum class ErrorCode {
  InvalidArgument,
  Config,
  Io,
  Numerical,
  Infeasible,
  Capacity,
};

// Single exception type for the engine; the C API maps `code()` onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace unilift
