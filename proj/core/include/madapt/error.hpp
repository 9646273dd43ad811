#pragma once

#include <stdexcept>
#include <string>

namespace madapt {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, numeric 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape mismatches and violated operation contracts.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration values or unparseable config files.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed schema/dataset/checkpoint files, inconsistent labels, or a
// soft-label bank missing a required entry.
struct DataError : Error {
    using Error::Error;
};

// NaN/Inf escaping a forward pass, divergent training, or an undefined
// statistic (e.g. correlation of a zero-variance vector).
struct NumericError : Error {
    using Error::Error;
};

}  // namespace madapt
