#pragma once

#include <stdexcept>
#include <string>

namespace semilab {

/// Caller supplied something outside an operation's precondition.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical stage could not deliver its accuracy contract.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace semilab
