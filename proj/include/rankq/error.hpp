#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankq {

// Base class for every error raised by the toolkit. Input errors (bad files,
// coverage mismatches) and precondition violations both derive from it so the
// command layer can map them to a single exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A value parsed correctly but lies outside its permitted set.
class RangeError : public ParseError {
public:
    using ParseError::ParseError;
};

// The pair ids of a sequence / prediction file do not match the model.
class CoverageError : public Error {
public:
    using Error::Error;
};

// A computation would exceed a configured size limit.
class CapacityError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class EmptyPairError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class WrongEstimatorError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class MissingScoresError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class DuplicatePairError : public Error {
public:
    using Error::Error;
};

}  // namespace rankq
