#pragma once

#include <stdexcept>
#include <string>

namespace cder {

/// Malformed or inconsistent input: bad files, dimension mismatches,
/// violated preconditions. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// A computation produced non-finite or otherwise unusable numbers.
/// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

} // namespace cder
