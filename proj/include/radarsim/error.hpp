#pragma once

#include <stdexcept>
#include <string>

namespace radarsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition (bad parameter, NaN, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input data is inconsistent with the grid or with itself.
class DataError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace radarsim
