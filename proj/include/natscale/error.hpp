#pragma once

#include <stdexcept>
#include <string>

namespace natscale {

// Bad input: parameters outside their documented domain, points outside an
// interval, malformed descriptors.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A finitized limit (truncation ladder, series, extrapolation) did not settle.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A verdict that cannot be decided from the available information, e.g. a
// tabulated density whose tail cannot be extrapolated. Never guessed.
class RefusedVerdict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Analytic criteria disagree with each other.
class InconsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define NATSCALE_REQUIRE(cond, msg)                                   \
    do {                                                              \
        if (!(cond)) throw ::natscale::InvalidArgument(std::string(msg)); \
    } while (0)

}  // namespace natscale
