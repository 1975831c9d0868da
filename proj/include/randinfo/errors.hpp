#pragma once

#include <stdexcept>
#include <string>

namespace randinfo {

/// Index or parameter outside the admissible range of a model object.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Precondition on the mathematical setting violated (empty tail, bad exponent, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation requested on a model that cannot provide it, e.g. point
/// evaluation on the abstract coordinate basis.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Spectrum whose tail is not square summable; theorem comparisons refuse it.
class DivergentSpectrum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The information matrix G is numerically rank deficient.
class ReconstructionFailure : public std::runtime_error {
 public:
  explicit ReconstructionFailure(double alpha_hat)
      : std::runtime_error("least squares reconstruction failed: s_n(G) = " +
                           std::to_string(alpha_hat)),
        alpha_hat_(alpha_hat) {}

  double alpha_hat() const noexcept { return alpha_hat_; }

 private:
  double alpha_hat_;
};

}  // namespace randinfo
