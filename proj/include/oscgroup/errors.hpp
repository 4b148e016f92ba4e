#pragma once

#include <stdexcept>
#include <string>

namespace oscgroup {

/// Base class for all engine errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Integration produced a non-finite state.
struct DivergenceError : Error {
    DivergenceError(int oscillator_, double time_, const std::string& what_)
        : Error(what_), oscillator(oscillator_), time(time_) {}
    int oscillator = -1;
    double time = 0.0;
};

/// Bisection endpoints classify identically; no threshold inside the interval.
struct NotBracketedError : Error {
    using Error::Error;
};

/// Input is degenerate in a way the operation cannot resolve.
struct DegenerateInputError : Error {
    using Error::Error;
};

/// A trace is constant over the analysis window; correlation is undefined.
struct DegenerateTraceError : Error {
    using Error::Error;
};

/// Matrix / vector dimensions do not agree.
struct DimensionError : Error {
    using Error::Error;
};

/// Simulated trajectories left the declared state range; the report is invalid.
struct RangeError : Error {
    using Error::Error;
};

/// Image dimensions are not divisible by the requested tiling.
struct TileError : Error {
    using Error::Error;
};

/// Input file could not be parsed. Message carries the file and line/row.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace oscgroup
