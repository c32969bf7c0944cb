#pragma once

#include <stdexcept>
#include <string>

namespace vacsim {

/// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input: configuration, arguments, incompatible shapes.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A numerical result did not converge (time window, quadrature box, grid capture).
class ConvergenceError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace vacsim
