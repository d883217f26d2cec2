#pragma once

#include <stdexcept>
#include <string>

namespace ftxl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
   using std::runtime_error::runtime_error;
};

class InvalidGame : public Error {
  public:
   using Error::Error;
};

/// A pure or mixed profile does not fit the game it is used with.
class InvalidProfile : public Error {
  public:
   using Error::Error;
};

class ShapeMismatch : public Error {
  public:
   using Error::Error;
};

class NotStrictEquilibrium : public Error {
  public:
   using Error::Error;
};

class DomainError : public Error {
  public:
   using Error::Error;
};

class InvalidConfiguration : public Error {
  public:
   using Error::Error;
};

/// Iterative solver gave up; carries the residual it reached.
class NumericalFailure : public Error {
  public:
   NumericalFailure(const std::string& what, double residual)
       : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual)
   {
   }
   double residual() const noexcept { return residual_; }

  private:
   double residual_;
};

/// Integration produced a non-finite state.
class DivergenceError : public Error {
  public:
   DivergenceError(const std::string& what, double last_valid_time)
       : Error(what), last_valid_time_(last_valid_time)
   {
   }
   double last_valid_time() const noexcept { return last_valid_time_; }

  private:
   double last_valid_time_;
};

class FitRefused : public Error {
  public:
   using Error::Error;
};

}  // namespace ftxl
