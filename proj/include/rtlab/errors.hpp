#pragma once

#include <stdexcept>
#include <string>

namespace rtlab {

/// Malformed input shape (wrong dimensions, out-of-range symbols, bad parameters).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable or inconsistent data files, or data that cannot support a computation.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rtlab
