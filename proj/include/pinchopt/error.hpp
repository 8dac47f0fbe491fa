#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pinchopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InfeasibleScenario : public Error {
 public:
  using Error::Error;
};

// Zero-length PA-user segment.
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

// Raised when some user or waveguide has no LoS-feasible partner.
class InfeasibleAssignment : public Error {
 public:
  InfeasibleAssignment(std::string what, std::vector<int> users, std::vector<int> waveguides)
      : Error(std::move(what)), users_(std::move(users)), waveguides_(std::move(waveguides)) {}

  const std::vector<int>& users() const noexcept { return users_; }
  const std::vector<int>& waveguides() const noexcept { return waveguides_; }

 private:
  std::vector<int> users_;
  std::vector<int> waveguides_;
};

}  // namespace pinchopt
