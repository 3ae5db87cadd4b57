// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace handbooster {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input data.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Bad configuration value or missing required key.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke an operation's precondition (e.g. uncanonicalized grasp).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Named asset or record could not be resolved.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Numerically degenerate input (collinear points, zero-area sets).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// File-level I/O or parse failure.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace handbooster
