#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treegreen {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -- graph ------------------------------------------------------------------

class CycleDetected : public Error {
public:
    using Error::Error;
};

class Disconnected : public Error {
public:
    using Error::Error;
};

class NonPositiveLength : public Error {
public:
    using Error::Error;
};

class DanglingEndpoint : public Error {
public:
    using Error::Error;
};

/// Splitting the tree exactly at a node is undefined; callers take one-sided
/// limits instead.
class PointAtNode : public Error {
public:
    using Error::Error;
};

class CoincidentPoints : public Error {
public:
    using Error::Error;
};

class NoRootDesignated : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

// -- coefficient expressions ------------------------------------------------

/// Syntax error with the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class UnknownIdentifier : public ParseError {
public:
    using ParseError::ParseError;
};

/// Domain violation while evaluating a coefficient (e.g. negative base with
/// fractional exponent, table lookup outside its range).
class CoefficientEvaluationError : public Error {
public:
    using Error::Error;
};

class NonPositiveP : public Error {
public:
    using Error::Error;
};

class NonPositiveRho : public Error {
public:
    using Error::Error;
};

// -- ODE integration --------------------------------------------------------

class StepSizeUnderflow : public Error {
public:
    using Error::Error;
};

// -- node conditions --------------------------------------------------------

class MissingBoundarySpec : public Error {
public:
    using Error::Error;
};

class IncompleteTrace : public Error {
public:
    using Error::Error;
};

// -- Green's function -------------------------------------------------------

class DegenerateProblem : public Error {
public:
    using Error::Error;
};

class NonConstantWronskian : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class IntervalDegenerate : public Error {
public:
    using Error::Error;
};

// -- finite-difference oracle -----------------------------------------------

class SingularSystem : public Error {
public:
    using Error::Error;
};

// -- configuration ----------------------------------------------------------

/// Invalid problem configuration; maps to CLI exit code 3.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace treegreen
