#include "hbs/blockenc.hpp"

#include <cmath>

#include "hbs/rng.hpp"
#include "hbs/sparsify.hpp"

namespace hbs {

namespace {

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(M);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Hermitian square root of I - X with eigenvalue clamping at zero; X = BB^dag
// or B^dag B can round slightly above one.
Matrix sqrt_complement(const Matrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(X);
  const RealVector lam = eig.eigenvalues();
  RealVector s(lam.size());
  for (Index i = 0; i < lam.size(); ++i) s(i) = std::sqrt(std::max(0.0, 1.0 - lam(i)));
  return eig.eigenvectors() * s.asDiagonal() * eig.eigenvectors().adjoint();
}

// Unitary completion of a contraction placed on the top-left n x n system
// corner: payload dim 2n, anc_dim 2.
Matrix dilation_unitary(const Matrix& Bsys) {
  const Index n = Bsys.rows();
  Matrix U(2 * n, 2 * n);
  U.topLeftCorner(n, n) = Bsys;
  U.topRightCorner(n, n) = sqrt_complement(Matrix(Bsys * Bsys.adjoint()));
  U.bottomLeftCorner(n, n) = sqrt_complement(Matrix(Bsys.adjoint() * Bsys));
  U.bottomRightCorner(n, n) = -Bsys.adjoint();
  return U;
}

EncodingDescriptor from_block(const Matrix& block, double alpha, double eps, Index ancillas,
                              Index rows, Index cols) {
  EncodingDescriptor e;
  e.alpha = alpha;
  e.eps = eps;
  e.ancillas = ancillas;
  e.has_payload = true;
  e.system_dim = std::max<Index>(1, std::max(rows, cols));
  Matrix Bsys = Matrix::Zero(e.system_dim, e.system_dim);
  if (rows && cols) Bsys.topLeftCorner(rows, cols) = block;
  e.payload = dilation_unitary(Bsys);
  e.block_rows = rows;
  e.block_cols = cols;
  return e;
}

}  // namespace

Matrix EncodingDescriptor::block() const {
  if (!has_payload) throw std::invalid_argument("descriptor carries no payload");
  return payload.topLeftCorner(block_rows, block_cols);
}

double EncodingDescriptor::unitarity_residual() const {
  if (!has_payload) throw std::invalid_argument("descriptor carries no payload");
  const Matrix G = payload.adjoint() * payload - Matrix::Identity(payload.rows(), payload.cols());
  return spectral_norm(G);
}

double EncodingDescriptor::definition_error(const Matrix& M) const {
  return spectral_norm(Matrix(M - alpha * block()));
}

EncodingDescriptor dilate(const Matrix& M, double alpha) {
  if (!M.allFinite()) throw std::invalid_argument("dilate: non-finite input");
  const double norm = spectral_norm(M);
  if (alpha < norm * (1.0 - 1e-13))
    throw std::invalid_argument("dilate: alpha must be at least the matrix 2-norm");
  const Index n = std::max<Index>(1, std::max(M.rows(), M.cols()));

  EncodingDescriptor e;
  e.alpha = alpha;
  e.ancillas = 1;
  e.has_payload = true;
  e.system_dim = n;
  Matrix Bsys = Matrix::Zero(n, n);
  if (M.size() && alpha > 0) Bsys.topLeftCorner(M.rows(), M.cols()) = M / alpha;
  e.payload = dilation_unitary(Bsys);
  e.block_rows = M.rows();
  e.block_cols = M.cols();
  e.eps = M.size() ? e.definition_error(M) : 0.0;
  return e;
}

EncodingDescriptor encode_sparse(const SparseMatrix& A, Index payload_guard) {
  const SparsityProfile prof = sparsity_profile(A);
  const double alpha =
      prof.c_sp * std::sqrt(static_cast<double>(prof.s_r) * static_cast<double>(prof.s_c));
  EncodingDescriptor e;
  e.alpha = alpha;
  e.eps = 0;
  e.oracle_nonzeros = A.nnz();
  // Bookkeeping per the sparse-oracle construction: n+3 ancillas for an
  // n-qubit system.
  Index n_qubits = 0;
  while ((Index(1) << n_qubits) < std::max<Index>(1, std::max(A.rows(), A.cols()))) ++n_qubits;
  e.ancillas = n_qubits + 3;
  if (std::max(A.rows(), A.cols()) <= payload_guard && A.rows() > 0 && A.cols() > 0) {
    const Matrix dense = A.to_dense();
    if (alpha > 0) {
      EncodingDescriptor full = dilate(dense, alpha);
      full.alpha = alpha;
      full.ancillas = e.ancillas;
      full.oracle_nonzeros = e.oracle_nonzeros;
      return full;
    }
    // all-zero matrix: payload encodes the zero block exactly
    EncodingDescriptor zero = from_block(Matrix::Zero(A.rows(), A.cols()), 0.0, 0.0, e.ancillas,
                                         A.rows(), A.cols());
    zero.oracle_nonzeros = e.oracle_nonzeros;
    return zero;
  }
  return e;  // prediction-only descriptor
}

EncodingDescriptor qmm(const EncodingDescriptor& U, const EncodingDescriptor& V) {
  EncodingDescriptor e;
  e.alpha = U.alpha * V.alpha;
  e.ancillas = U.ancillas + V.ancillas;
  e.eps = U.alpha * V.eps + V.alpha * U.eps;
  if (!U.has_payload || !V.has_payload) return e;
  if (U.block_cols != V.block_rows || U.system_dim != V.system_dim)
    throw std::invalid_argument("qmm: payload block dimensions are incompatible");

  // W[(i,j,s),(i',j',s')] = sum_sigma delta_jj' U[(i,s),(i',sigma)]
  //                                   delta_ii'' V[(j,sigma),(j',s')]
  // i.e. U acting on (anc_U, sys) tensored with identity on anc_V, times V
  // acting on (anc_V, sys).
  const Index n = U.system_dim;
  const Index du = U.anc_dim(), dv = V.anc_dim();
  const Index dim = du * dv * n;
  Matrix Ubar = Matrix::Zero(dim, dim), Vbar = Matrix::Zero(dim, dim);
  for (Index i = 0; i < du; ++i)
    for (Index i2 = 0; i2 < du; ++i2)
      for (Index j = 0; j < dv; ++j)
        for (Index s = 0; s < n; ++s)
          for (Index s2 = 0; s2 < n; ++s2)
            Ubar((i * dv + j) * n + s, (i2 * dv + j) * n + s2) = U.payload(i * n + s, i2 * n + s2);
  for (Index j = 0; j < dv; ++j)
    for (Index j2 = 0; j2 < dv; ++j2)
      for (Index i = 0; i < du; ++i)
        for (Index s = 0; s < n; ++s)
          for (Index s2 = 0; s2 < n; ++s2)
            Vbar((i * dv + j) * n + s, (i * dv + j2) * n + s2) = V.payload(j * n + s, j2 * n + s2);
  e.has_payload = true;
  e.payload = Ubar * Vbar;
  e.system_dim = n;
  e.block_rows = U.block_rows;
  e.block_cols = V.block_cols;
  return e;
}

PrepPair exact_prep(const Vector& y) {
  PrepPair p;
  p.y = y;
  p.beta = y.cwiseAbs().sum();
  p.gamma = 0;
  return p;
}

EncodingDescriptor lcu(const std::vector<EncodingDescriptor>& terms, const PrepPair& prep) {
  if (terms.empty()) throw std::invalid_argument("lcu: empty term list");
  if (prep.y.size() != static_cast<Index>(terms.size()))
    throw std::invalid_argument("lcu: coefficient count must match term count");

  EncodingDescriptor e;
  double alpha_max = 0;
  Index anc_max = 0;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    e.alpha += std::abs(prep.y[j]) * terms[j].alpha;
    e.eps += std::abs(prep.y[j]) * terms[j].eps;
    alpha_max = std::max(alpha_max, terms[j].alpha);
    anc_max = std::max(anc_max, terms[j].ancillas);
  }
  e.eps += alpha_max * prep.gamma;
  Index m_qubits = 0;
  while ((Index(1) << m_qubits) < static_cast<Index>(terms.size())) ++m_qubits;
  e.ancillas = anc_max + std::max<Index>(m_qubits, 1);

  bool all_payload = true;
  for (const auto& t : terms) all_payload = all_payload && t.has_payload;
  if (!all_payload) return e;

  const Index n = terms[0].system_dim;
  const Index br = terms[0].block_rows, bc = terms[0].block_cols;
  Index d = 1;
  for (const auto& t : terms) {
    if (t.system_dim != n || t.block_rows != br || t.block_cols != bc)
      throw std::invalid_argument("lcu: payload block dimensions differ");
    d = std::max(d, t.anc_dim());
  }
  const Index m = static_cast<Index>(terms.size());
  const Index mpad = Index(1) << std::max<Index>(m_qubits, 1);

  // Exact state-preparation pair for y' with y'_j = y_j alpha_j:
  // c_j = sqrt(|y'_j|/beta'), d_j = c_j phase(y'_j).
  Vector cvec = Vector::Zero(mpad), dvec = Vector::Zero(mpad);
  const double beta_eff = e.alpha;
  for (Index j = 0; j < m; ++j) {
    const Complex yj = prep.y[j] * terms[j].alpha;
    const double mag = std::abs(yj);
    if (beta_eff > 0 && mag > 0) {
      cvec[j] = std::sqrt(mag / beta_eff);
      dvec[j] = cvec[j] * (yj / mag);
    }
  }

  // SELECT = sum_j |j><j| (x) U_j (components ancilla-padded to a common d),
  // conjugated by the preparation unitaries on the j register.
  const Index dim = mpad * d * n;
  Matrix select = Matrix::Zero(dim, dim);
  for (Index j = 0; j < mpad; ++j) {
    Matrix Uj = Matrix::Identity(d * n, d * n);
    if (j < m) {
      const Index dj = terms[j].anc_dim();
      Uj.setIdentity();
      Uj.topLeftCorner(dj * n, dj * n) = terms[j].payload;
    }
    select.block(j * d * n, j * d * n, d * n, d * n) = Uj;
  }
  const auto completed_unitary = [&](const Vector& first_col) {
    Matrix Q = Matrix::Identity(mpad, mpad);
    Q.col(0) = first_col;
    // Gram-Schmidt completion against the identity columns.
    Index next = 1;
    for (Index c = 0; c < mpad && next < mpad; ++c) {
      Vector v = Matrix::Identity(mpad, mpad).col(c);
      for (Index k = 0; k < next; ++k) v -= (Q.col(k).adjoint() * v).value() * Q.col(k);
      const double nv = v.norm();
      if (nv > 1e-8) Q.col(next++) = v / nv;
    }
    return Q;
  };
  Matrix PR = completed_unitary(dvec);
  Matrix PL = completed_unitary(cvec);

  // (PL^dag (x) I) SELECT (PR (x) I)
  Matrix PRI = Matrix::Zero(dim, dim), PLI = Matrix::Zero(dim, dim);
  for (Index a = 0; a < mpad; ++a)
    for (Index b = 0; b < mpad; ++b) {
      if (PR(a, b) != Complex(0, 0))
        PRI.block(a * d * n, b * d * n, d * n, d * n) =
            PR(a, b) * Matrix::Identity(d * n, d * n);
      if (PL(a, b) != Complex(0, 0))
        PLI.block(a * d * n, b * d * n, d * n, d * n) =
            PL(a, b) * Matrix::Identity(d * n, d * n);
    }
  e.has_payload = true;
  e.payload = PLI.adjoint() * select * PRI;
  e.system_dim = n;
  e.block_rows = br;
  e.block_cols = bc;
  return e;
}

double predict_alpha(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L) {
  if (alpha_D.size() != alpha_L.size() + 1)
    throw std::invalid_argument("predict_alpha: need lambda+1 diagonal and lambda basis factors");
  double sum = 0, prod = 1;
  for (std::size_t l = 0; l < alpha_D.size(); ++l) {
    sum += alpha_D[l] * prod;
    if (l < alpha_L.size()) prod *= alpha_L[l] * alpha_L[l];
  }
  return sum;
}

double predict_eps(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L,
                   double per_factor_eps) {
  if (alpha_D.size() != alpha_L.size() + 1)
    throw std::invalid_argument("predict_eps: need lambda+1 diagonal and lambda basis factors");
  const std::size_t lambda = alpha_L.size();
  // prefix[l] = prod_{m=1}^{l} (alpha^L_m)^2
  std::vector<double> prefix(lambda + 1, 1.0);
  for (std::size_t m = 0; m < lambda; ++m) prefix[m + 1] = prefix[m] * alpha_L[m] * alpha_L[m];
  double total = prefix[lambda];
  for (std::size_t l = 1; l <= lambda; ++l) {
    double inner = 0;
    for (std::size_t j = l; j <= lambda + 1; ++j) inner += alpha_D[j - 1] * prefix[j - 1];
    total += (2.0 * alpha_L[l - 1] * inner + 1.0) * prefix[l - 1];
  }
  return total * per_factor_eps;
}

double recursion_eps(const std::vector<double>& alpha_D, const std::vector<double>& alpha_L,
                     double per_factor_eps) {
  if (alpha_D.size() != alpha_L.size() + 1)
    throw std::invalid_argument("recursion_eps: need lambda+1 diagonal and lambda basis factors");
  const std::size_t lambda = alpha_L.size();
  double alpha = alpha_D[lambda];       // alpha_{lambda+1}
  double eps = per_factor_eps;          // eps_{lambda+1}
  for (std::size_t l = lambda; l >= 1; --l) {
    const double aL = alpha_L[l - 1];
    eps = aL * (alpha * per_factor_eps + aL * eps) + alpha * aL * per_factor_eps + per_factor_eps;
    alpha = alpha * aL * aL + alpha_D[l - 1];
  }
  return eps;
}

ComponentBounds component_alpha_bounds(int d, double c_sp, double f,
                                       const std::vector<Index>& n_per_level,
                                       const std::vector<Index>& k_per_level) {
  if (n_per_level.size() != k_per_level.size())
    throw std::invalid_argument("component_alpha_bounds: level list mismatch");
  const double d3 = std::pow(3.0, d), d6 = std::pow(6.0, d);
  ComponentBounds b;
  for (std::size_t l = 0; l < n_per_level.size(); ++l) {
    const double nl = static_cast<double>(n_per_level[l]);
    const double kl = static_cast<double>(k_per_level[l]);
    b.alpha_D.push_back((l == 0 ? d3 : d6 - d3) * nl * c_sp);
    b.alpha_L.push_back(f * std::sqrt(std::max(0.0, kl * (nl - kl + 1.0))));
  }
  return b;
}

double plateau_alpha(int d, double r, double f, double n1, double p, int lambda) {
  const double d2 = std::pow(2.0, d), d3 = std::pow(3.0, d), d6 = std::pow(6.0, d);
  const double q = f * f * r * (d2 * r - r + 1.0) / std::pow(2.0, p);
  double geom;  // sum_{j=1}^{lambda} q^j
  if (std::abs(q - 1.0) < 1e-14)
    geom = static_cast<double>(lambda);
  else
    geom = (std::pow(q, lambda + 1) - q) / (q - 1.0);
  return d2 * (d6 - d3) * r * geom + d3 * n1;
}

namespace {

SparseMatrix block_diag_sparse(const std::vector<Matrix>& blocks) {
  Index rows = 0, cols = 0;
  for (const Matrix& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  SparseMatrix S(rows, cols);
  Index r0 = 0, c0 = 0;
  for (const Matrix& b : blocks) {
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = 0; i < b.rows(); ++i)
        if (b(i, j) != Complex(0, 0)) S.add(r0 + i, c0 + j, b(i, j));
    r0 += b.rows();
    c0 += b.cols();
  }
  S.finalize();
  return S;
}

double sparse_rule_alpha(const SparseMatrix& S) {
  const SparsityProfile p = sparsity_profile(S);
  return p.c_sp * std::sqrt(static_cast<double>(p.s_r) * static_cast<double>(p.s_c));
}

// Zero-pad a level-frame matrix into the N x N system corner.
Matrix pad_to(const Matrix& M, Index n) {
  Matrix P = Matrix::Zero(n, n);
  if (M.size()) P.topLeftCorner(M.rows(), M.cols()) = M;
  return P;
}

Matrix unit_rank_one(Index n, Xorshift64Star& rng) {
  Vector u(n), v(n);
  for (Index i = 0; i < n; ++i) {
    u[i] = rng.cnormal();
    v[i] = rng.cnormal();
  }
  u.normalize();
  v.normalize();
  return u * v.adjoint();  // spectral norm exactly ||u|| ||v|| = 1
}

}  // namespace

RecursiveEncoding recursive_encode(const HBSFactors& F, double per_factor_eps,
                                   Index payload_guard) {
  if (per_factor_eps < 0) throw std::invalid_argument("per-factor eps must be >= 0");
  const int lambda = F.depth;
  RecursiveEncoding out;

  std::vector<SparseMatrix> Dspar, Lspar, Rspar;
  for (const LevelFactor& lf : F.levels) {
    Dspar.push_back(lf.D);
    Lspar.push_back(block_diag_sparse(lf.L_blocks));
    Rspar.push_back(block_diag_sparse(lf.R_blocks));
  }
  Dspar.push_back(F.D_last);

  out.alpha_D.resize(lambda + 1);
  out.alpha_L.resize(lambda);
  for (int l = 0; l <= lambda; ++l) out.alpha_D[l] = sparse_rule_alpha(Dspar[l]);
  for (int l = 0; l < lambda; ++l)
    out.alpha_L[l] = std::max(sparse_rule_alpha(Lspar[l]), sparse_rule_alpha(Rspar[l]));

  EncodingDescriptor& desc = out.descriptor;
  desc.alpha = predict_alpha(out.alpha_D, out.alpha_L);
  out.eps_recursion = recursion_eps(out.alpha_D, out.alpha_L, per_factor_eps);
  desc.eps = std::max(predict_eps(out.alpha_D, out.alpha_L, per_factor_eps), out.eps_recursion);
  desc.ancillas = 2 * 1 * lambda + lambda + 1;  // components use one ancilla each
  for (const SparseMatrix& S : Dspar) desc.oracle_nonzeros += S.nnz();
  for (const SparseMatrix& S : Lspar) desc.oracle_nonzeros += S.nnz();
  for (const SparseMatrix& S : Rspar) desc.oracle_nonzeros += S.nnz();

  if (F.N > payload_guard) {
    desc.has_payload = false;  // prediction-only
    return out;
  }

  // Exact block composition in the zero-padded N x N system space. QMM and
  // LCU compose the encoded blocks exactly, so the final block can be tracked
  // directly and witnessed by a single dilation at the end.
  const Index n = F.N;
  Xorshift64Star rng(0x9d2c5680);
  const auto perturbed_block = [&](const SparseMatrix& S, double alpha) {
    Matrix B = pad_to(S.to_dense(), n);
    if (per_factor_eps > 0 && alpha > 0) B += per_factor_eps * unit_rank_one(n, rng);
    return alpha > 0 ? Matrix(B / alpha) : Matrix::Zero(n, n).eval();
  };

  Matrix cur = perturbed_block(Dspar[lambda], out.alpha_D[lambda]);
  double cur_alpha = out.alpha_D[lambda];
  double cur_eps = per_factor_eps;
  for (int l = lambda; l >= 1; --l) {
    const double aL = out.alpha_L[l - 1];
    const Matrix bL = perturbed_block(Lspar[l - 1], aL);
    const Matrix bR = perturbed_block(Rspar[l - 1], aL);
    const Matrix bD = perturbed_block(Dspar[l - 1], out.alpha_D[l - 1]);
    // qmm(U_L, qmm(current, U_R))
    Matrix prod = bL * (cur * bR);
    const double prod_alpha = aL * (cur_alpha * aL);
    const double prod_eps =
        aL * (cur_alpha * per_factor_eps + aL * cur_eps) + (cur_alpha * aL) * per_factor_eps;
    // lcu with coefficients (1, 1)
    const double new_alpha = prod_alpha + out.alpha_D[l - 1];
    if (new_alpha > 0)
      cur = (prod_alpha * prod + out.alpha_D[l - 1] * bD) / new_alpha;
    else
      cur = Matrix::Zero(n, n);
    cur_alpha = new_alpha;
    cur_eps = prod_eps + per_factor_eps;
  }
  out.alpha_recursion = cur_alpha;

  // Undo the level-1 frame permutation so the block encodes A in the
  // original index order (a relabeling of the system register).
  Matrix blk(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) blk(F.perm[r], F.perm[c]) = cur(r, c);

  // Clamp roundoff above unit norm before completing the unitary.
  const double bn = spectral_norm(blk);
  if (bn > 1.0) blk /= bn;

  const Index anc = desc.ancillas;
  const double alpha = desc.alpha, eps = desc.eps;
  const Index nnz = desc.oracle_nonzeros;
  desc = from_block(blk, alpha, eps, anc, n, n);
  desc.oracle_nonzeros = nnz;
  return out;
}

}  // namespace hbs
