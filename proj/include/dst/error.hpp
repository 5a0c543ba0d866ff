#pragma once

#include <stdexcept>
#include <string>

namespace dst {

// Error taxonomy. The CLI maps each kind to a machine-readable
// "ERROR <kind>: <message>" line and a nonzero exit code.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (IDX, config, checkpoint).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values encountered during computation.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace dst
