#pragma once

#include <functional>
#include <vector>

#include "hbs/common.hpp"
#include "hbs/geometry.hpp"

namespace hbs {

struct RRQRResult {
  Index rank = 0;
  std::vector<Index> perm;  // column permutation of the input, pivots first
  Matrix T;                 // rank x (n-rank) interpolation coefficients A_k^{-1} B_k
  RealVector r_diag;        // |diagonal| of the triangular factor (length rank)
  double achieved_tol = 0;  // |R_{k+1,k+1}| / |R_{1,1}| at the cut (0 at full rank)
};

// Column-pivoted Householder QR followed by Gu-Eisenstat swap passes until
// rho_ij = sqrt(|T_ij|^2 + (gamma_j(C)/omega_i(A))^2) <= f, which yields
// q1(k,n) = sqrt(1 + f^2 k (n-k)) and q2(k,n) = f. The rank is the smallest k
// with |R_{k+1,k+1}| <= tol * |R_{1,1}|. Ties pick the lowest column index.
RRQRResult strong_rrqr(const Matrix& M, double f, double tol);

struct IDResult {
  std::vector<Index> skeleton;  // k column indices of the input, pivot order
  Matrix P;                     // k x n interpolation with identity on skeleton columns
  double achieved_tol = 0;
};

/// Column interpolative decomposition M ~ M(:, skeleton) * P.
IDResult interp_decompose(const Matrix& M, double f, double tol);

struct RowIDResult {
  std::vector<Index> skeleton;  // k row indices of the input
  Matrix basis;                 // n x k with identity rows on the skeleton
  double achieved_tol = 0;
};

/// Row-side ID: X ~ basis * X(skeleton, :). Uses the plain (unconjugated)
/// transpose so complex values interpolate exactly like the column version.
RowIDResult row_interp(const Matrix& X, double f, double tol);

// Matrix access handed to proxy_id: near-field submatrices come from the
// (masked) system matrix, proxy interactions from the kernel.
struct BlockAccess {
  std::function<Matrix(const std::vector<Index>&, const std::vector<Index>&)> submatrix;
  std::function<Matrix(const std::vector<Index>&, const ProxySurface&)> proxy_block;
};

// Row skeleton of one block from the concatenated
// [near-field columns | proxy-interaction columns] matrix. When the block has
// no far field the proxy part is dropped and the result reduces to an ID of
// the near columns alone. Skeleton indices are positions within block_rows.
RowIDResult proxy_id(const std::vector<Index>& block_rows, const std::vector<Index>& near_cols,
                     bool far_nonempty, const BlockAccess& access, const ProxySurface& proxy,
                     const BoundingBox& box, double f, double tol);

}  // namespace hbs
