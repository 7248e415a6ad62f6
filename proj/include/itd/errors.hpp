#pragma once

#include <stdexcept>
#include <string>

namespace itd {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error("dimension error: " + msg) {}
};

struct SingularMatrixError : Error {
    explicit SingularMatrixError(const std::string& msg) : Error("singular matrix: " + msg) {}
};

struct RankDeficientError : Error {
    explicit RankDeficientError(const std::string& msg) : Error("rank deficient: " + msg) {}
};

struct NoConvergenceError : Error {
    explicit NoConvergenceError(const std::string& msg) : Error("no convergence: " + msg) {}
};

struct NotSymmetricError : Error {
    explicit NotSymmetricError(const std::string& msg) : Error("not symmetric: " + msg) {}
};

struct EmptyInputError : Error {
    explicit EmptyInputError(const std::string& msg) : Error("empty input: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("invalid config: " + msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

}  // namespace itd
