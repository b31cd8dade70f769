#pragma once

#include <stdexcept>
#include <string>

namespace ganalyzer {

// Error classes map 1:1 onto CLI exit codes.
enum class ErrorKind : int {
    usage      = 1,
    io         = 2,
    validation = 3,
    numeric    = 4,
    remote     = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(ErrorKind::usage, msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(ErrorKind::io, msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(ErrorKind::validation, msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(ErrorKind::numeric, msg) {}
};

struct RemoteError : Error {
    explicit RemoteError(const std::string& msg) : Error(ErrorKind::remote, msg) {}
};

} // namespace ganalyzer
