#pragma once
// Error taxonomy. The CLI maps InputError to exit 2 and the numerical
// failures to exit 3.

#include <stdexcept>
#include <string>

namespace capax {

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// m < 2K+1 on a quadrature grid
struct AliasingError : InputError {
    using InputError::InputError;
};

// eigenvalue inside the margin, resonant spectrum, crossing at t = 1, ...
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton / bisection / shooting did not converge
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace capax
