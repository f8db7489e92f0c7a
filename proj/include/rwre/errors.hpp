#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rwre {

struct NotStochasticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EllipticityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotUnitVectorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonpositiveVarianceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientRegenerationsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateSampleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UndeterminedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexOutOfRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the 1-based line of the offending input row.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

}  // namespace rwre
