#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wvcal {

enum class Errc {
  invalid_answer,
  invalid_score,
  invalid_input,
  domain,
  missing_gold,
  missing_label,
  invalid_parameter,
  calibration_degenerate,
  parse,
  version,
  insufficient_responses,
  invalid_artifact,
  io,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to a diagnostic without parsing
// message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace wvcal
