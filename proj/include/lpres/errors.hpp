#pragma once

#include <stdexcept>
#include <string>

namespace lpres {

// Bad input or configuration. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed to meet its tolerance. Maps to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lpres
