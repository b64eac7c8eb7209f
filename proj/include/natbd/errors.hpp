#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace natbd {

// Error categories map 1:1 onto CLI exit codes (see tools/natbd.cpp):
// config 2, input 3, supply/feasibility 4, anything else 5.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

// Raised when a manifest line cannot be decoded; carries the 1-based line.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class SupplyError : public Error {
public:
    using Error::Error;
};

}  // namespace natbd
