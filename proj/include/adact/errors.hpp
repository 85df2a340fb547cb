#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adact {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// init_hinges with s <= r.
struct DegenerateRangeError : Error {
    DegenerateRangeError(double r, double s)
        : Error("degenerate hinge range: r=" + std::to_string(r) + " s=" + std::to_string(s)) {}
};

// init_hinges with fewer than two hinges.
struct InvalidHingeCountError : Error {
    explicit InvalidHingeCountError(std::size_t h)
        : Error("invalid hinge count " + std::to_string(h) + ", need at least 2") {}
};

// locate() called with a net value outside [r, s].
struct OutOfRangeError : Error {
    OutOfRangeError(double n, double r, double s)
        : Error("net value " + std::to_string(n) + " outside hinge range [" +
                std::to_string(r) + ", " + std::to_string(s) + "]") {}
};

// fit_ranges on a unit whose net function is constant over all patterns.
struct DegenerateUnitError : Error {
    explicit DegenerateUnitError(std::size_t unit_index, std::string hint = "")
        : Error("hidden unit " + std::to_string(unit_index) +
                " has a constant net function; its hinge range is degenerate" +
                (hint.empty() ? "" : ". " + hint)),
          unit(unit_index) {}
    std::size_t unit;
};

// Non-finite value in an input pattern matrix.
struct InvalidInputError : Error {
    explicit InvalidInputError(std::size_t pattern_index)
        : Error("non-finite value in input pattern " + std::to_string(pattern_index)),
          pattern(pattern_index) {}
    std::size_t pattern;
};

// orthonormalize() on a system whose first basis function has no energy.
struct FirstBasisDegenerateError : Error {
    FirstBasisDegenerateError()
        : Error("first basis function is degenerate: r(1,1) is at or below the dependence threshold") {}
};

// Malformed CSV input.
struct ParseError : Error {
    ParseError(std::size_t line_number, const std::string& what)
        : Error("line " + std::to_string(line_number) + ": " + what), line(line_number) {}
    std::size_t line;
};

// Invalid experiment configuration; `path` is the offending JSON field.
struct ConfigError : Error {
    ConfigError(std::string field_path, const std::string& what)
        : Error(field_path + ": " + what), path(std::move(field_path)) {}
    std::string path;
};

// Empty dataset where patterns are required.
struct EmptyDatasetError : Error {
    EmptyDatasetError() : Error("dataset is empty") {}
};

// A weight or activation update produced NaN/Inf.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace adact
