#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teamcomm {

// Raised for invalid data or violated preconditions. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transcript syntax error carrying the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace teamcomm
