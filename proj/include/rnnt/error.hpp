#pragma once

#include <stdexcept>
#include <string>

namespace rnnt {

enum class ErrorCode {
  DIMENSION_MISMATCH,
  ILLEGAL_VARIANT,
  RESIDUAL_DIM,
  LENGTH_MISMATCH,
  DEGENERATE_INPUT,
  SHAPE_MISMATCH,
  NONFINITE_INPUT,
  MISSING_WCH,
  EMPTY_INPUT,
  WEIGHT_SHAPE_MISMATCH,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rnnt
