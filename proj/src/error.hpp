#pragma once

#include <stdexcept>
#include <string>

namespace fossils {

enum class ErrorCode {
  dimension,
  parameter,
  singular,
  convergence,
  divergence,
  breakdown,
  parse,
  unsupported,
  io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure in the library surfaces as a fossils::Error carrying one of
/// the codes above; the C API maps them one-to-one onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fossils
