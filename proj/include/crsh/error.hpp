#pragma once

#include <stdexcept>
#include <string>

namespace crsh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or malformed input data.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read, parsed or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// A configuration exceeds one of the fixed-width encodings
/// (light index field, 18/14-bit hit pairs, triangle batch size).
class ConfigLimitError : public Error {
public:
    using Error::Error;
};

} // namespace crsh
