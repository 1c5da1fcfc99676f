#pragma once

#include <stdexcept>
#include <string>

namespace mg1probe {

// Invalid configuration or precondition violation (CLI exit code 2).
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure during a computation (CLI exit code 3).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mg1probe
