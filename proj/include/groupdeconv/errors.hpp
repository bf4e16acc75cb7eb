#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace groupdeconv {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A caller-supplied value violates a documented precondition.
class ParameterError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

//! Malformed input file; line and column are 1-based.
class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error(what)
    , line_(line)
    , column_(column)
  {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

//! |phi_hat(u)| fell below the denominator floor while integrating phi'/phi.
class DenominatorTooSmall : public Error
{
public:
  DenominatorTooSmall(double u, double modulus, double floor)
    : Error(message(u, modulus, floor))
    , u_(u)
    , modulus_(modulus)
  {}

  double u() const noexcept { return u_; }
  double modulus() const noexcept { return modulus_; }

private:
  static std::string message(double u, double modulus, double floor)
  {
    std::ostringstream os;
    os.precision(10);
    os << "|phi_hat(u)| = " << modulus << " below floor " << floor
       << " at u = " << u;
    return os.str();
  }

  double u_;
  double modulus_;
};

class CutoffExceedsRange : public Error
{
public:
  using Error::Error;
};

//! The characteristic-function modulus never reached the requested level.
class LevelNotReached : public Error
{
public:
  using Error::Error;
};

namespace detail {

template<typename... Args>
std::string
concat(const Args&... args)
{
  std::ostringstream os;
  os.precision(10);
  (os << ... << args);
  return os.str();
}

template<typename... Args>
void
require(bool condition, const Args&... args)
{
  if (!condition)
    throw ParameterError(concat(args...));
}

} // namespace detail

} // namespace groupdeconv
