#pragma once

#include <stdexcept>
#include <string>

namespace osbench {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input or a violated precondition. The CLI maps it to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// A registered classifier name whose algorithm is not implemented here.
class UnimplementedVariant : public Error {
public:
    using Error::Error;
};

// An iterative solver stopped at its iteration cap without meeting tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

} // namespace osbench
