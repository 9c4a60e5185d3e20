#pragma once

#include <stdexcept>
#include <string>

namespace milscreen {

// Base for every error the library throws; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the caller (flags, paths, config values).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace milscreen
