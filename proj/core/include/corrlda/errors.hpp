#pragma once

#include <stdexcept>
#include <string>

namespace corrlda {

// Input data violated a file format or a documented invariant.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A query reduced to nothing after stop-word and vocabulary filtering.
class EmptyQueryError : public ValidationError {
public:
    explicit EmptyQueryError(const std::string& what) : ValidationError(what) {}
};

// A computation produced a non-finite or otherwise unusable value.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace corrlda
