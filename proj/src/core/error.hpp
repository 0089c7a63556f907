#pragma once

#include <stdexcept>
#include <string>

namespace sign {

enum class ErrorCode {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    Corrupt = 4,
    Internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

} // namespace sign
