#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hbs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = std::int64_t;

// Kernel evaluated at coincident points, or a duplicate point pair found
// during assembly. Carries the offending index pair when known.
class SingularEvaluationError : public std::runtime_error {
 public:
  explicit SingularEvaluationError(const std::string& what, Index i = -1, Index j = -1)
      : std::runtime_error(what), index_i(i), index_j(j) {}
  Index index_i;
  Index index_j;
};

// A direct factorization hit a zero pivot / structurally singular input.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what, Index pivot = -1)
      : std::runtime_error(what), pivot_index(pivot) {}
  Index pivot_index;
};

// Numerical failure that is not an input-validation problem (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hbs
