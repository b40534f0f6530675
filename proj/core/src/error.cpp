#include "visword/error.hpp"

namespace visword {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::shape_mismatch: return "shape mismatch";
        case ErrorCode::vocab_mismatch: return "vocabulary mismatch";
        case ErrorCode::empty_input: return "empty input";
        case ErrorCode::out_of_range: return "out of range";
        case ErrorCode::unknown_doc: return "unknown document";
        case ErrorCode::duplicate_name: return "duplicate name";
        case ErrorCode::not_found: return "not found";
        case ErrorCode::frozen_index: return "frozen index";
        case ErrorCode::corrupt_header: return "corrupt header";
        case ErrorCode::unsupported_version: return "unsupported version";
        case ErrorCode::truncated: return "truncated file";
        case ErrorCode::io_failure: return "i/o failure";
    }
    return "unknown error";
}

void raise(ErrorCode code, const std::string& what) {
    throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace visword
