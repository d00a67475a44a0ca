#pragma once

#include <stdexcept>
#include <string>

namespace mfld {

// Mirrors the status codes exported through the C API.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Domain = 2,        // hypothesis or precondition of a formula fails
    Capacity = 3,      // dimension / enumeration cap exceeded
    Numerical = 4,
    Io = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) throw Error(code, what);
}

}  // namespace mfld
