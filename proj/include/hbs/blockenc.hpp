#pragma once

#include <optional>
#include <vector>

#include "hbs/common.hpp"
#include "hbs/factor.hpp"
#include "hbs/sparsematrix.hpp"

namespace hbs {

// Classical stand-in for an (alpha, a, eps) block encoding: an explicit
// unitary whose top-left block_rows x block_cols corner carries M / alpha.
// The payload is organized as anc_dim copies of an n x n "system" space so
// that QMM/LCU compose exactly like their quantum counterparts; ancilla
// counts are bookkeeping integers, not simulated registers.
struct EncodingDescriptor {
  double alpha = 0;
  Index ancillas = 0;
  double eps = 0;

  bool has_payload = false;
  Matrix payload;            // unitary of size (anc_dim * system_dim)
  Index system_dim = 0;
  Index block_rows = 0, block_cols = 0;
  Index oracle_nonzeros = 0; // stored-entry accounting for sparse encodings

  Index anc_dim() const { return system_dim ? payload.rows() / system_dim : 0; }
  Matrix block() const;                          // top-left block_rows x block_cols
  double unitarity_residual() const;             // ||U^dag U - I||_2
  double definition_error(const Matrix& M) const;  // ||M - alpha * block()||_2
};

/// Exact unitary dilation [[B, sqrt(I-BB^dag)], [sqrt(I-B^dag B), -B^dag]]
/// of B = M / alpha. Requires alpha >= ||M||_2.
EncodingDescriptor dilate(const Matrix& M, double alpha);

/// Sparse-oracle encoding: alpha = max|a_ij| sqrt(s_r s_c). The payload is
/// built by dilation when the matrix is small enough.
EncodingDescriptor encode_sparse(const SparseMatrix& A, Index payload_guard = 2048);

/// Product encoding: (alpha beta, a+b, alpha eps_V + beta eps_U) of the
/// product of the encoded blocks.
EncodingDescriptor qmm(const EncodingDescriptor& U, const EncodingDescriptor& V);

struct PrepPair {
  Vector y;
  double beta = 0;   // >= ||y||_1
  double gamma = 0;  // preparation error
};

PrepPair exact_prep(const Vector& y);

/// Linear combination sum_j y_j A_j with per-term subnormalizations:
/// alpha = sum |y_j| alpha_j, eps = (max alpha_j) gamma + sum |y_j| eps_j.
EncodingDescriptor lcu(const std::vector<EncodingDescriptor>& terms, const PrepPair& prep);

double predict_alpha(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L);

/// Subnormalization error budget: the closed form
/// eps_A = [sum_l (2 a^L_l sum_{j=l}^{lambda+1} a^D_j prod_{m<j} (a^L_m)^2 + 1)
///          prod_{m<l} (a^L_m)^2 + prod_{m<=lambda} (a^L_m)^2] eps.
double predict_eps(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L,
                   double per_factor_eps);

/// The same budget evaluated by unrolling the level recursion
/// eps_l = a^L(alpha_{l+1} eps + a^L eps_{l+1}) + alpha_{l+1} a^L eps + eps.
/// Never exceeds predict_eps when every a^L >= 1.
double recursion_eps(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L,
                     double per_factor_eps);

struct ComponentBounds {
  std::vector<double> alpha_D;  // 3^d n_1 c_sp, then (6^d-3^d) n_l c_sp
  std::vector<double> alpha_L;  // f sqrt(k_l (n_l - k_l + 1))
};

ComponentBounds component_alpha_bounds(int d, double c_sp, double f,
                                       const std::vector<Index>& n_per_level,
                                       const std::vector<Index>& k_per_level);

/// Closed-form bound on alpha_A for the |x-y|^{-p} kernel on a unit-spaced
/// line, where the level-l diagonal entries decay like 2^{-(l-1)p}.
double plateau_alpha(int d, double r, double f, double n1, double p, int lambda);

struct RecursiveEncoding {
  EncodingDescriptor descriptor;
  std::vector<double> alpha_D;      // per level, size depth+1
  std::vector<double> alpha_L;      // per level, size depth
  double alpha_recursion = 0;       // step-by-step composed alpha (matches Eq. closed form)
  double eps_recursion = 0;
};

/// Bottom-up construction over the factor hierarchy: encode D_{lambda+1},
/// then per level qmm(U^L, qmm(current, U^R)) followed by an LCU with U^D.
/// Factor payloads are zero-padded to the full system dimension; the
/// descriptor carries the closed-form alpha_A and eps_A. per_factor_eps
/// injects a rank-one perturbation of that spectral norm into every factor
/// block so the error budget can be exercised at visible magnitudes. The
/// payload is materialized only for N <= payload_guard.
RecursiveEncoding recursive_encode(const HBSFactors& factors, double per_factor_eps,
                                   Index payload_guard = 256);

}  // namespace hbs
