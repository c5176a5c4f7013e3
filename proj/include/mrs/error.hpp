#pragma once

#include <stdexcept>
#include <string>

namespace mrs {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by caller-supplied arguments.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Malformed input data (CSV cells, JSON documents, graph files).
class DataError : public Error {
public:
    using Error::Error;
};

// Parameter regeneration gave up after the retry budget.
class RegenerationError : public Error {
public:
    RegenerationError(const std::string& what, int node) : Error(what), node_(node) {}
    int node() const noexcept { return node_; }

private:
    int node_;
};

} // namespace mrs
