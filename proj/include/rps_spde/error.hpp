#pragma once

#include <stdexcept>
#include <string>

namespace rps {

// Values match the RPS_E_* codes of the C API.
enum class Errc : int {
  ok = 0,
  zero_eigenvalue = 1,
  grid_too_coarse = 2,
  dimension_mismatch = 3,
  negative_time = 4,
  non_finite_drift = 5,
  grid_misaligned = 6,
  out_of_extent = 7,
  wrong_time_sign = 8,
  window_exceeds_extent = 9,
  no_convergence = 10,
  divergent_series = 11,
  singular_system = 12,
  parse_error = 13,
  validation_error = 14,
  invalid_argument = 15,
  io_error = 16,
  internal = 17,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }
  // what() without the code name
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace rps
