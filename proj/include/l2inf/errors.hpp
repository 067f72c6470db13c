// Error taxonomy shared by the library and the CLI. Each class maps to a
// distinct process exit code so scripted callers can tell failure modes apart.
#pragma once

#include <stdexcept>
#include <string>

namespace l2inf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters, malformed run configs, shape mismatches.
struct ConfigError : Error {
    using Error::Error;
};

// Incompatible operand shapes in linear algebra or model wiring.
struct DimensionError : ConfigError {
    using ConfigError::ConfigError;
};

// Missing or unreadable files.
struct IoError : Error {
    using Error::Error;
};

// Files that exist but do not parse (bad magic, truncation, version skew).
struct FormatError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required (diverged training etc.).
struct NumericError : Error {
    using Error::Error;
};

namespace exit_code {
constexpr int ok = 0;
constexpr int config = 2;
constexpr int io = 3;
constexpr int format = 4;
constexpr int numeric = 5;
} // namespace exit_code

} // namespace l2inf
