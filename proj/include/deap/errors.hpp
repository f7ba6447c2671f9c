#pragma once

#include <stdexcept>
#include <string>

namespace deap {

// Common base so callers can catch any library error with one handler.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller violated an API precondition (length/shape mismatch, bad argument).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// A requested target value lies outside the achievable range of a device or map.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

// External bytes could not be decoded (bad magic, truncation, malformed row).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Decoded input is structurally valid but has the wrong shape or fields.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

// A configuration object violates its own invariants (bounds, budgets).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A file is missing or unreadable.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace deap
