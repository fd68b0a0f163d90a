#pragma once

#include <stdexcept>
#include <string>

namespace splitdoor {

// Bad input data: malformed files, empty panels, nothing left to test.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller passed arguments outside an operation's domain.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace splitdoor
