#pragma once

#include <stdexcept>
#include <string>

namespace nklab {

// Config / argument problems. CLI maps these to exit code 2.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failures (bracket exhaustion, instability, aliasing). Exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A verifier assertion that did not hold. Exit code 1.
struct AssertionError : std::runtime_error {
    explicit AssertionError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nklab
