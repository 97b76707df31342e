#pragma once

#include <stdexcept>
#include <string>

namespace absim {

// Exit codes shared between the library's error classes and the CLI.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIo = 3,
    kExitNumeric = 4,
};

// Invalid parameters, indices, dimensions or run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File and format failures. `offset` is the byte position at which the
// format check failed, or -1 when no position applies.
struct IoError : std::runtime_error {
    long long offset = -1;
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
    IoError(const std::string& msg, long long at)
        : std::runtime_error(msg + " (at byte " + std::to_string(at) + ")"), offset(at) {}
};

// Numeric failures: degenerate histograms, undefined correlation, NaN loss.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace absim
