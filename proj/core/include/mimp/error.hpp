#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mimp {

enum class Errc {
  invalid_parameter,
  out_of_region,
  insufficient_data,
  degenerate_channel,
  division_by_zero,
  no_inverse,
  bound_invalid,
  invalid_record,
  invalid_registration,
  protocol_error,
  invalid_profiles,
  corrupt_index,
  budget_exceeded,
  stage_error,
  internal_error,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mimp
