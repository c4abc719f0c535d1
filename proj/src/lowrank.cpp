#include "hbs/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hbs {

namespace {

// Householder QR of M(:, perm) with the column order fixed by the caller.
// Returns the upper-trapezoidal factor R (m x n) in place of the reflectors'
// upper part; only R is needed here, Q is discarded.
Matrix fixed_order_r(const Matrix& M, const std::vector<Index>& perm) {
  const Index m = M.rows(), n = static_cast<Index>(perm.size());
  Matrix R(m, n);
  for (Index j = 0; j < n; ++j) R.col(j) = M.col(perm[j]);
  const Index kmax = std::min(m, n);
  Vector v(m);
  for (Index k = 0; k < kmax; ++k) {
    const Index len = m - k;
    double norm = R.col(k).tail(len).norm();
    if (norm == 0.0) continue;
    Complex alpha = R(k, k);
    const double aabs = std::abs(alpha);
    const Complex phase = aabs == 0.0 ? Complex(1, 0) : alpha / aabs;
    // v = x + phase*norm*e1; reflector I - 2 vv*/v*v
    v.tail(len) = R.col(k).tail(len);
    v(k) += phase * norm;
    const double vnorm2 = v.tail(len).squaredNorm();
    if (vnorm2 == 0.0) continue;
    for (Index j = k; j < n; ++j) {
      const Complex coef = 2.0 * (v.tail(len).adjoint() * R.col(j).tail(len)).value() / vnorm2;
      R.col(j).tail(len) -= coef * v.tail(len);
    }
    R(k, k) = -phase * norm;
    R.col(k).tail(len - 1).setZero();
  }
  return R;
}

struct SwapCriterion {
  double rho = 0;
  Index i = 0, j = 0;  // pivot row i, trailing column j (relative to the split)
};

// max over (i,j) of sqrt(|T_ij|^2 + (gamma_j(C) / omega_i(A))^2)
SwapCriterion max_rho(const Matrix& R, Index k, Matrix& T_out) {
  const Index n = R.cols();
  const auto A = R.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  T_out = A.solve(R.topRightCorner(k, n - k));
  Matrix Ainv = Matrix::Identity(k, k);
  Ainv = A.solve(Ainv);
  RealVector omega_inv(k);  // omega_inv_i = ||e_i^T A^{-1}||
  for (Index i = 0; i < k; ++i) omega_inv(i) = Ainv.row(i).norm();
  const Index mrows = R.rows();
  RealVector gamma(n - k);
  for (Index j = 0; j < n - k; ++j)
    gamma(j) = mrows > k ? R.col(k + j).tail(mrows - k).norm() : 0.0;

  SwapCriterion best;
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < n - k; ++j) {
      const double t = std::abs(T_out(i, j));
      const double g = gamma(j) * omega_inv(i);
      const double rho = std::sqrt(t * t + g * g);
      if (rho > best.rho) {
        best.rho = rho;
        best.i = i;
        best.j = j;
      }
    }
  return best;
}

}  // namespace

RRQRResult strong_rrqr(const Matrix& M, double f, double tol) {
  if (!(f >= 1.0)) throw std::invalid_argument("strong RRQR parameter f must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  if (!M.allFinite()) throw std::invalid_argument("strong_rrqr: non-finite input");

  const Index m = M.rows(), n = M.cols();
  RRQRResult res;
  res.perm.resize(n);
  std::iota(res.perm.begin(), res.perm.end(), Index(0));
  if (m == 0 || n == 0) {
    res.T = Matrix::Zero(0, n);
    res.r_diag = RealVector::Zero(0);
    return res;
  }

  // Phase 1: column-pivoted Householder QR, stopping on diagonal decay.
  Matrix R = M;
  Vector v(m);
  RealVector norms(n), norms0(n);
  for (Index j = 0; j < n; ++j) norms0(j) = norms(j) = R.col(j).squaredNorm();
  const Index kmax = std::min(m, n);
  std::vector<double> rdiag;
  double r11 = 0;
  Index k = 0;
  while (k < kmax) {
    // recompute drifted norms before pivot selection
    for (Index j = k; j < n; ++j)
      if (norms(j) < 1e-12 * norms0(j)) norms(j) = R.col(j).tail(m - k).squaredNorm();
    Index piv = k;
    for (Index j = k + 1; j < n; ++j)
      if (norms(j) > norms(piv)) piv = j;  // strict '>' keeps the lowest index on ties
    const double pivot_norm = std::sqrt(std::max(0.0, norms(piv)));
    if (k == 0) r11 = pivot_norm;
    if (pivot_norm <= tol * r11 || pivot_norm == 0.0) {
      res.achieved_tol = r11 > 0 ? pivot_norm / r11 : 0.0;
      break;
    }
    if (piv != k) {
      R.col(piv).swap(R.col(k));
      std::swap(norms(piv), norms(k));
      std::swap(norms0(piv), norms0(k));
      std::swap(res.perm[piv], res.perm[k]);
    }
    // Householder reflector for column k
    const Index len = m - k;
    const double norm = R.col(k).tail(len).norm();
    const Complex alpha = R(k, k);
    const double aabs = std::abs(alpha);
    const Complex phase = aabs == 0.0 ? Complex(1, 0) : alpha / aabs;
    v.tail(len) = R.col(k).tail(len);
    v(k) += phase * norm;
    const double vnorm2 = v.tail(len).squaredNorm();
    if (vnorm2 > 0.0) {
      for (Index j = k; j < n; ++j) {
        const Complex coef = 2.0 * (v.tail(len).adjoint() * R.col(j).tail(len)).value() / vnorm2;
        R.col(j).tail(len) -= coef * v.tail(len);
      }
    }
    R(k, k) = -phase * norm;
    if (len > 1) R.col(k).tail(len - 1).setZero();
    rdiag.push_back(norm);
    for (Index j = k + 1; j < n; ++j) {
      norms(j) -= std::norm(R(k, j));
      if (norms(j) < 0) norms(j) = 0;
    }
    ++k;
  }
  res.rank = k;

  // Phase 2: Gu-Eisenstat swaps. Each swap grows |det(A_k)| by rho > f >= 1,
  // so the loop terminates; the cap is a safety net for f == 1.
  Matrix T;
  if (k > 0 && k < n) {
    const Index max_swaps = 30 * (n + k) + 100;
    for (Index it = 0; it < max_swaps; ++it) {
      const SwapCriterion c = max_rho(R, k, T);
      if (!(c.rho > f)) break;
      std::swap(res.perm[c.i], res.perm[k + c.j]);
      R = fixed_order_r(M, res.perm);
    }
  } else {
    T = Matrix::Zero(k, n - k);
  }
  if (k > 0 && k < n && T.size() == 0) {
    const auto A = R.topLeftCorner(k, k).triangularView<Eigen::Upper>();
    T = A.solve(R.topRightCorner(k, n - k));
  }

  res.T = std::move(T);
  res.r_diag.resize(k);
  for (Index i = 0; i < k; ++i) res.r_diag(i) = std::abs(R(i, i));
  return res;
}

IDResult interp_decompose(const Matrix& M, double f, double tol) {
  const RRQRResult r = strong_rrqr(M, f, tol);
  IDResult id;
  id.achieved_tol = r.achieved_tol;
  id.skeleton.assign(r.perm.begin(), r.perm.begin() + r.rank);
  id.P = Matrix::Zero(r.rank, M.cols());
  for (Index i = 0; i < r.rank; ++i) id.P(i, r.perm[i]) = 1.0;
  for (Index j = r.rank; j < M.cols(); ++j) id.P.col(r.perm[j]) = r.T.col(j - r.rank);
  return id;
}

RowIDResult row_interp(const Matrix& X, double f, double tol) {
  // Plain transpose (no conjugation): X ~ P^T X(skel, :) follows directly
  // from X^T ~ X^T(:, skel) P.
  const IDResult id = interp_decompose(X.transpose(), f, tol);
  RowIDResult rid;
  rid.skeleton = id.skeleton;
  rid.basis = id.P.transpose();
  rid.achieved_tol = id.achieved_tol;
  return rid;
}

RowIDResult proxy_id(const std::vector<Index>& block_rows, const std::vector<Index>& near_cols,
                     bool far_nonempty, const BlockAccess& access, const ProxySurface& proxy,
                     const BoundingBox& box, double f, double tol) {
  if (far_nonempty) {
    if (!(proxy.radius > box.circumradius()))
      throw std::invalid_argument("proxy surface does not enclose the block's box");
    for (Index i = 0; i < proxy.points.size(); ++i)
      if (box.contains(proxy.points.point(i)))
        throw std::invalid_argument("proxy point inside the block's box");
  }

  const Index nr = static_cast<Index>(block_rows.size());
  Matrix near = access.submatrix(block_rows, near_cols);
  Matrix prox = far_nonempty ? access.proxy_block(block_rows, proxy) : Matrix(nr, 0);
  Matrix cat(nr, near.cols() + prox.cols());
  cat << near, prox;
  return row_interp(cat, f, tol);
}

}  // namespace hbs
