#pragma once

#include <stdexcept>
#include <string>

namespace mims {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid field values, unknown configuration keys, inconsistent key sets.
struct ValidationError : Error {
    using Error::Error;
};

// Config text that cannot be read at all; carries the offending location.
struct ParseError : Error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& what, int line_, int column_)
        : Error(what + " (line " + std::to_string(line_) + ", column " +
                std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

// Middle-mirror placement where the dissipative coupling denominator vanishes.
struct DegenerateCouplingError : Error {
    using Error::Error;
};

// Operation requested outside its supported dynamical regime.
struct RegimeError : Error {
    using Error::Error;
};

// Covariance handed to a pure-state routine is not pure within tolerance.
struct ImpureStateError : Error {
    using Error::Error;
};

// Eigendecomposition failed its residual check.
struct ConvergenceError : Error {
    using Error::Error;
};

// Truncation scan did not converge at the largest basis size.
struct NotConvergedError : Error {
    using Error::Error;
};

// Langevin step size above the resolution gate.
struct StepSizeError : Error {
    using Error::Error;
};

// Parameter set whose predicted occupation exceeds what the Fock basis can hold.
struct OracleScaleError : Error {
    using Error::Error;
};

}  // namespace mims
