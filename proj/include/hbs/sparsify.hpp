#pragma once

#include <vector>

#include "hbs/common.hpp"
#include "hbs/factor.hpp"
#include "hbs/sparsematrix.hpp"

namespace hbs {

// Extended sparsification of the telescoping factorization: the banded block
// system over (x, y_1, z_1, ..., y_lambda, z_lambda) with L_l replaced by
// t^{-1} L_l and R_l by t R_l. The x block keeps the original index order.
SparseMatrix assemble_extended(const HBSFactors& factors, double t);
inline SparseMatrix assemble_extended(const HBSFactors& factors) {
  return assemble_extended(factors, factors.t);
}

struct ExtendedSolution {
  Vector x;
  std::vector<Vector> y, z;  // per level
  double success_prob = 1.0; // ||x||^2 / ||x'||^2
  Vector full;               // the raw extended solution
};

/// Direct sparse solve of A_sp x' = (b, 0, ..., 0). b has length N; the
/// auxiliary zero blocks are padded internally.
ExtendedSolution solve_extended(const SparseMatrix& A_sp, const Vector& b, double t);

/// The post-processing operator: the extended matrix with its first block row
/// replaced by [I 0 ... 0], so A' x' = (x, 0, ..., 0).
SparseMatrix build_postprocess(const HBSFactors& factors, double t = 1.0);

/// max over rows of the absolute row sum; contains the spectrum.
double gershgorin_bound(const SparseMatrix& A);

struct SparsityProfile {
  Index s_r = 0;      // max nonzeros in any row
  Index s_c = 0;      // max nonzeros in any column
  double c_sp = 0;    // max |entry|
};

SparsityProfile sparsity_profile(const SparseMatrix& A);

/// Tikhonov-regularized normal solve (A^dag A + alpha I) x = A^dag b.
/// Returns the solution and the condition-number bound
/// (c_sp^2 max(s_r s_c, s_r^2) + alpha) / alpha.
std::pair<Vector, double> tikhonov_solve(const SparseMatrix& A_sp, const Vector& b, double alpha);

struct ErrorPropagationReport {
  double eps = 0;        // ||A - A_eps|| / ||A||
  double kappa = 0;      // cond(A)
  double eps_kappa = 0;
  bool precondition_ok = false;  // eps * kappa < 1
  double rel_x_err = 0;
  double x_bound = 0;    // eps kappa / (1 - eps kappa)
  double rel_b_err = 0;
  double b_bound = 0;    // eps kappa
  bool x_within_bound = false;
  bool b_within_bound = false;
};

/// Measures the propagation of a matrix perturbation into the solution and
/// compares against the eps*kappa/(1 - eps*kappa) bound. Dense, desk scale.
ErrorPropagationReport error_propagation_check(const Matrix& A, const Matrix& A_eps,
                                               const Vector& b);

}  // namespace hbs
