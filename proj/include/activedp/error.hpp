#pragma once

#include <stdexcept>
#include <string>

namespace activedp {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values (CLI and service map this to exit code 2 / HTTP 400).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. The message carries the offending line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class ConflictError : public Error {
public:
    using Error::Error;
};

/// Operation requested before its inputs exist (e.g. export before any checkpoint).
class PreconditionError : public Error {
public:
    using Error::Error;
};

}  // namespace activedp
