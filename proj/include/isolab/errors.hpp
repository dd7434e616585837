#pragma once

#include <stdexcept>
#include <string>

namespace isolab {

/// Argument outside the mathematical domain of an operation (θ ∉ (0,1), p < 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Adaptive quadrature or an iterative solve did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root bracket whose endpoint values share a sign.
class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// e^{-ψ} is not integrable (or its mass underflows) on the requested domain.
class NonIntegrableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A potential failed the 1-convexity certificate.
class ConvexityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace isolab
