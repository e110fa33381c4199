#pragma once

#include <stdexcept>
#include <string>

namespace sysrisk {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries file and 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& file, long line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(file), line_(line) {}
    const std::string& file() const { return file_; }
    long line() const { return line_; }

private:
    std::string file_;
    long line_;
};

// Input parsed but violates a panel invariant (interior gap, nonpositive
// balance item, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Caller passed an argument outside the documented domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Problem size exceeds a configured feasibility cap.
class FeasibilityError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// Too few observations for the requested estimation.
class SampleSizeError : public Error {
public:
    using Error::Error;
};

// Regressor matrix rank-deficient after zero-column pruning.
class SingularDesignError : public Error {
public:
    using Error::Error;
};

// Solver failed to converge or produced non-finite values.
class NumericError : public Error {
public:
    using Error::Error;
};

// A pipeline stage is missing an upstream artifact.
class DependencyError : public Error {
public:
    using Error::Error;
};

} // namespace sysrisk
