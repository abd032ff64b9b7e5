#pragma once

#include <stdexcept>
#include <string>

namespace vollab {

// Input violates a precondition or a configured constraint. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (CSV schema, missing files, duplicate
// keys). CLI exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed to meet its tolerance (quadrature blowup,
// optimizer breakdown, root not bracketed). CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// A well-posed inversion has no solution for the given inputs, e.g. an option
// price outside the no-arbitrage band.
class NoSolutionError : public NumericalError {
public:
    explicit NoSolutionError(const std::string& msg) : NumericalError(msg) {}
};

} // namespace vollab
