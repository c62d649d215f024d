#pragma once

#include <stdexcept>
#include <string>

namespace whgm {

/// Failure categories shared by the C++ core and the C API.
enum class ErrorCode {
  invalid_argument = 1,
  invalid_model,
  domain,
  singular_point,
  not_converged,
  numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace whgm
