#pragma once

#include <stdexcept>
#include <string>

namespace semshift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input violates a documented precondition (bad shape, empty set, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (divergence, non-finite values, rank-0 input).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Two objects were combined in a way their contracts forbid.
class ContractViolation : public Error {
public:
    using Error::Error;
};

}  // namespace semshift
