#pragma once

#include <stdexcept>
#include <string>

namespace qwo {

// Invalid configuration or input file (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A run that cannot continue for numerical reasons (CLI exit code 3):
// annihilating collapse, Bohmian node stall, trajectory leaving support.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qwo
