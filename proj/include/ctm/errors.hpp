#pragma once
#include <stdexcept>
#include <string>

namespace ctm {

// Configuration / input validation failures (CLI exit code 1).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Two fields or operators built on incompatible grids.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested time outside the range a wind field is defined on.
struct TimeRangeError : std::runtime_error {
    explicit TimeRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical precondition (CFL bound, stability bound, matrix cap,
// schedule pairing, degenerate reference) was violated.
struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

// File parsing / serialization failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ctm
