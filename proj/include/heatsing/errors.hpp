#pragma once

#include <stdexcept>
#include <string>

namespace heatsing {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument outside the documented range of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation requested exactly on the singular locus.
class OnSingularityError : public Error {
public:
    using Error::Error;
};

/// A finite-difference stencil reaches too close to the singular locus.
class StencilTooCloseError : public Error {
public:
    using Error::Error;
};

/// Every sample of a log-log fit was dropped.
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

}  // namespace heatsing
