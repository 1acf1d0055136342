#pragma once

#include <stdexcept>
#include <string>

namespace flipci {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, unsupported values, design violations.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// A model fit collapsed: separation, offset pushing all means to a support
// boundary, or similar. Carries no iterate; callers decide how to react.
class DegenerateModelError : public Error {
public:
    explicit DegenerateModelError(const std::string& msg) : Error(msg) {}
};

// IRLS failed to converge within the iteration budget.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& msg, int iterations)
        : Error(msg), iterations(iterations) {}
    int iterations;
};

// Flip variance numerically zero: the standardized statistic is undefined.
class ZeroVarianceError : public Error {
public:
    explicit ZeroVarianceError(const std::string& msg) : Error(msg) {}
};

// Singular information matrix or other numerical breakdown.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace flipci
