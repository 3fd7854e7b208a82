#pragma once

#include <stdexcept>
#include <string>

namespace skelimg {

// Exception hierarchy; the CLI maps each kind onto its own exit code.
class Error : public std::runtime_error
{
 public:
   using std::runtime_error::runtime_error;
};

/// Bad input data: shape mismatches, unknown layouts, malformed files.
class ValidationError : public Error
{
 public:
   using Error::Error;
};

class IoError : public Error
{
 public:
   using Error::Error;
};

/// Raised when an optimization produces non-finite values.
class DivergenceError : public Error
{
 public:
   using Error::Error;
};

} // namespace skelimg
