#pragma once

#include <stdexcept>
#include <string>

namespace polycarl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input (dimension mismatch, bad literal, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A request that would exceed the configured desk-scale budget.
class ResourceLimit : public Error {
 public:
  ResourceLimit(const std::string& what, double estimate)
      : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

}  // namespace polycarl
