#pragma once

#include <stdexcept>
#include <string>

namespace ratfact {

// Malformed or inconsistent input (dimensions, non-finite values, bad files).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Structural failure of a reduction: singular pencil, lost stabilizability.
class StructureError : public std::runtime_error {
 public:
  explicit StructureError(const std::string& what)
      : std::runtime_error(what) {}
};

// An eigenvalue sits inside the exclusion strip around the region boundary.
class BoundaryError : public StructureError {
 public:
  explicit BoundaryError(const std::string& what) : StructureError(what) {}
};

// A requested factor does not exist (e.g. inner factor with boundary zeros).
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(const std::string& what)
      : std::runtime_error(what) {}
};

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const { return rcond_; }

 private:
  double rcond_;
};

class VerificationError : public std::runtime_error {
 public:
  explicit VerificationError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ratfact
