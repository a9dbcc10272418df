#pragma once

#include <stdexcept>
#include <string>

namespace ccw {

// Invalid user input: bad flags, malformed files, mismatched dimensions.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// The data violates a structural requirement of the space itself
// (span deficiency at a probed point, non-minimal depth, frame failure).
class StructuralDefect : public std::runtime_error {
public:
    explicit StructuralDefect(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric machinery failed: integrator step underflow, trajectory left the
// trust box, Newton divergence, solver stall.
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse errors carry a position so the CLI can point at the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace ccw
