#pragma once

#include <stdexcept>
#include <string>

namespace sqrtsae {

// Bad user input: shapes, ranges, malformed files. CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation that cannot produce a finite answer. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sqrtsae
