#pragma once

#include <stdexcept>
#include <string>

namespace b2b {

/// Base class for every error raised by the planning library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or violated type invariant on ingest.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A precondition on an argument does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The connection pays nothing back (no exchangeable energy, NR max <= 0).
class UneconomicError : public Error {
public:
    using Error::Error;
};

/// A numerical routine (power flow, perturbed solve) failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace b2b
