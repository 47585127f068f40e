#pragma once

#include <stdexcept>
#include <string>

namespace ccot {

// Malformed or contradictory user input: bad config fields, unknown keys,
// out-of-contract CLI arguments.  The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// An algorithm cannot continue numerically: kernel underflow, a collapsed
// line search, an infeasible confidence level, rejection sampling that never
// accepts.  The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ccot
