#pragma once

#include <stdexcept>
#include <string>

namespace knotlat {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / usage problems (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Eigensolver failed to converge.
struct SolverError : Error {
    using Error::Error;
};

// Computation errors at a requested parameter point (CLI exit code 1).
struct GaplessError : Error {
    using Error::Error;
};

struct ResolutionError : Error {
    using Error::Error;
};

struct DegenerateSpectrumError : Error {
    using Error::Error;
};

struct GridTooCoarseError : Error {
    using Error::Error;
};

struct DegenerateProjectionError : Error {
    using Error::Error;
};

struct NearEPError : Error {
    using Error::Error;
};

struct DegenerateFillingError : Error {
    using Error::Error;
};

struct ImaginaryResidueError : Error {
    using Error::Error;
};

// File read/write failures.
struct IoError : Error {
    using Error::Error;
};

} // namespace knotlat
