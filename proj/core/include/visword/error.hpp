#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace visword {

enum class ErrorCode {
    invalid_argument,
    shape_mismatch,
    vocab_mismatch,
    empty_input,
    out_of_range,
    unknown_doc,
    duplicate_name,
    not_found,
    frozen_index,
    corrupt_header,
    unsupported_version,
    truncated,
    io_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so
/// callers (the CLI in particular) can distinguish bad data from bad usage.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace visword
