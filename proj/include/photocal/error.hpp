#pragma once

#include <stdexcept>
#include <string>

namespace photocal {

// Categories map one-to-one onto the CLI exit-code contract.
enum class ErrorKind {
    Internal = 1,
    BadInput = 2,
    InsufficientData = 3,
    Coverage = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace photocal
