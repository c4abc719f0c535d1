#include "hbs/sparsify.hpp"

#include <cmath>

#include <Eigen/SparseLU>
#include <Eigen/SparseCholesky>

namespace hbs {

namespace {

struct ExtendedLayout {
  std::vector<BlockSegment> cols;  // x, y1, z1, ...
  std::vector<BlockSegment> rows;  // eq_b, eq_z1, eq_y1, ...
  Index n_total = 0;
};

ExtendedLayout extended_layout(const HBSFactors& F) {
  ExtendedLayout lay;
  Index coff = 0, roff = 0;
  lay.cols.push_back({"x", coff, F.N});
  coff += F.N;
  lay.rows.push_back({"eq_b", roff, F.N});
  roff += F.N;
  for (int l = 1; l <= F.depth; ++l) {
    const LevelFactor& lf = F.levels[l - 1];
    const Index rl = lf.rank_rows(), cl = lf.rank_cols();
    lay.cols.push_back({"y" + std::to_string(l), coff, rl});
    coff += rl;
    lay.cols.push_back({"z" + std::to_string(l), coff, cl});
    coff += cl;
    lay.rows.push_back({"eq_z" + std::to_string(l), roff, cl});
    roff += cl;
    lay.rows.push_back({"eq_y" + std::to_string(l), roff, rl});
    roff += rl;
  }
  lay.n_total = coff;
  if (roff != coff) throw NumericalError("extended layout is not square");
  return lay;
}

// Scatter one block-diagonal factor. to_row/to_col translate local block
// coordinates into global extended coordinates.
template <typename RowMap, typename ColMap>
void emit_block_diag(SparseMatrix& A, const std::vector<Matrix>& blocks, Complex scale,
                     const RowMap& to_row, const ColMap& to_col) {
  Index r0 = 0, c0 = 0;
  for (const Matrix& b : blocks) {
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = 0; i < b.rows(); ++i)
        if (b(i, j) != Complex(0, 0)) A.add(to_row(r0 + i), to_col(c0 + j), scale * b(i, j));
    r0 += b.rows();
    c0 += b.cols();
  }
}

}  // namespace

SparseMatrix assemble_extended(const HBSFactors& F, double t) {
  if (!(t > 0) || t > 1) throw std::invalid_argument("scaling parameter t must lie in (0, 1]");
  const ExtendedLayout lay = extended_layout(F);
  SparseMatrix A(lay.n_total, lay.n_total);
  A.block_layout = lay.cols;
  A.row_layout = lay.rows;

  const auto col_seg = [&](int idx) { return lay.cols[idx].offset; };
  const auto row_seg = [&](int idx) { return lay.rows[idx].offset; };

  // x rows: D_1 (original index order) and t^{-1} L_1.
  const Complex tinv(1.0 / t, 0.0), tval(t, 0.0);
  if (F.depth == 0) {
    for (const Triplet& e : F.D_last.entries()) A.add(F.perm[e.row], F.perm[e.col], e.value);
    A.finalize();
    return A;
  }

  const LevelFactor& l1 = F.levels[0];
  for (const Triplet& e : l1.D.entries()) A.add(F.perm[e.row], F.perm[e.col], e.value);
  emit_block_diag(A, l1.L_blocks, tinv, [&](Index r) { return F.perm[r]; },
                  [&](Index c) { return col_seg(1) + c; });  // cols: y1

  for (int l = 1; l <= F.depth; ++l) {
    const LevelFactor& lf = F.levels[l - 1];
    const int ycol = 2 * l - 1, zcol = 2 * l;  // segment indices in lay.cols
    const int zrow = 2 * l - 1, yrow = 2 * l;  // segment indices in lay.rows
    const Index rl = lf.rank_rows(), cl = lf.rank_cols();

    // eq_z_l: (t R_l) x_prev - z_l = 0
    if (l == 1)
      emit_block_diag(A, lf.R_blocks, tval, [&](Index r) { return row_seg(zrow) + r; },
                      [&](Index c) { return F.perm[c]; });
    else
      emit_block_diag(A, lf.R_blocks, tval, [&](Index r) { return row_seg(zrow) + r; },
                      [&](Index c) { return col_seg(2 * (l - 1)) + c; });  // cols: z_{l-1}
    for (Index q = 0; q < cl; ++q) A.add(row_seg(zrow) + q, col_seg(zcol) + q, Complex(-1, 0));

    // eq_y_l: -y_l + D_{l+1} z_l + t^{-1} L_{l+1} y_{l+1} = 0
    for (Index p = 0; p < rl; ++p) A.add(row_seg(yrow) + p, col_seg(ycol) + p, Complex(-1, 0));
    const SparseMatrix& Dnext = (l == F.depth) ? F.D_last : F.levels[l].D;
    for (const Triplet& e : Dnext.entries())
      A.add(row_seg(yrow) + e.row, col_seg(zcol) + e.col, e.value);
    if (l < F.depth)
      emit_block_diag(A, F.levels[l].L_blocks, tinv, [&](Index r) { return row_seg(yrow) + r; },
                      [&](Index c) { return col_seg(2 * l + 1) + c; });  // cols: y_{l+1}
  }
  A.finalize();
  return A;
}

ExtendedSolution solve_extended(const SparseMatrix& A_sp, const Vector& b, double t) {
  if (!(t > 0)) throw std::invalid_argument("scaling parameter t must be > 0");
  if (!A_sp.finalized()) throw std::invalid_argument("matrix must be finalized");
  if (A_sp.rows() != A_sp.cols()) throw std::invalid_argument("extended system must be square");
  const BlockSegment* xseg = A_sp.find_segment("x");
  if (!xseg) throw std::invalid_argument("matrix has no x segment in its block layout");
  if (b.size() != xseg->size)
    throw std::invalid_argument("right-hand side must match the x block");

  // Structurally empty rows/columns give the pivot index right away.
  {
    std::vector<char> row_seen(A_sp.rows(), 0), col_seen(A_sp.cols(), 0);
    for (const Triplet& e : A_sp.entries()) {
      row_seen[e.row] = 1;
      col_seen[e.col] = 1;
    }
    for (Index i = 0; i < A_sp.rows(); ++i)
      if (!row_seen[i] || !col_seen[i])
        throw SingularMatrixError("extended system is structurally singular", i);
  }

  Vector rhs = Vector::Zero(A_sp.rows());
  rhs.segment(xseg->offset, xseg->size) = b;

  Eigen::SparseMatrix<Complex> A = A_sp.to_eigen();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("sparse LU factorization failed: " + lu.lastErrorMessage(), -1);
  Vector sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw SingularMatrixError("sparse LU solve failed", -1);

  ExtendedSolution out;
  out.full = sol;
  out.x = sol.segment(xseg->offset, xseg->size);
  double aux2 = 0;
  for (const BlockSegment& seg : A_sp.block_layout) {
    if (seg.name == "x") continue;
    Vector v = sol.segment(seg.offset, seg.size);
    aux2 += v.squaredNorm();
    if (seg.name[0] == 'y')
      out.y.push_back(std::move(v));
    else
      out.z.push_back(std::move(v));
  }
  const double x2 = out.x.squaredNorm();
  out.success_prob = x2 / (x2 + aux2);
  return out;
}

SparseMatrix build_postprocess(const HBSFactors& F, double t) {
  SparseMatrix ext = assemble_extended(F, t);
  SparseMatrix A(ext.rows(), ext.cols());
  A.block_layout = ext.block_layout;
  A.row_layout = ext.row_layout;
  const Index n = F.N;
  for (const Triplet& e : ext.entries())
    if (e.row >= n) A.add(e.row, e.col, e.value);  // drop the first block row
  for (Index i = 0; i < n; ++i) A.add(i, i, Complex(1, 0));
  A.finalize();
  return A;
}

double gershgorin_bound(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("gershgorin_bound needs a square matrix");
  std::vector<double> rowsum(A.rows(), 0.0);
  for (const Triplet& e : A.entries()) rowsum[e.row] += std::abs(e.value);
  double m = 0;
  for (double s : rowsum) m = std::max(m, s);
  return m;
}

SparsityProfile sparsity_profile(const SparseMatrix& A) {
  SparsityProfile p;
  p.s_r = A.max_row_nnz();
  p.s_c = A.max_col_nnz();
  p.c_sp = A.max_abs();
  return p;
}

std::pair<Vector, double> tikhonov_solve(const SparseMatrix& A_sp, const Vector& b, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("Tikhonov parameter alpha must be > 0");
  if (b.size() != A_sp.rows()) throw std::invalid_argument("right-hand side length mismatch");

  Eigen::SparseMatrix<Complex> A = A_sp.to_eigen();
  Eigen::SparseMatrix<Complex> normal = (Eigen::SparseMatrix<Complex>(A.adjoint()) * A).pruned();
  Eigen::SparseMatrix<Complex> id(A.cols(), A.cols());
  id.setIdentity();
  normal = normal + Complex(alpha, 0) * id;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Complex>> ldlt;
  ldlt.compute(normal);
  if (ldlt.info() != Eigen::Success)
    throw SingularMatrixError("regularized normal matrix factorization failed", -1);
  Vector x = ldlt.solve(Vector(A.adjoint() * b));

  const SparsityProfile prof = sparsity_profile(A_sp);
  const double srsc = static_cast<double>(prof.s_r) * static_cast<double>(prof.s_c);
  const double sr2 = static_cast<double>(prof.s_r) * static_cast<double>(prof.s_r);
  const double bound = (prof.c_sp * prof.c_sp * std::max(srsc, sr2) + alpha) / alpha;
  return {std::move(x), bound};
}

ErrorPropagationReport error_propagation_check(const Matrix& A, const Matrix& A_eps,
                                               const Vector& b) {
  if (A.rows() != A.cols() || A.rows() != A_eps.rows() || A.cols() != A_eps.cols())
    throw std::invalid_argument("error_propagation_check: dimension mismatch");
  if (b.size() != A.rows()) throw std::invalid_argument("right-hand side length mismatch");

  ErrorPropagationReport rep;
  Eigen::BDCSVD<Matrix> svdA(A);
  const double normA = svdA.singularValues()(0);
  const double sigmin = svdA.singularValues()(svdA.singularValues().size() - 1);
  if (sigmin == 0) {
    rep.kappa = std::numeric_limits<double>::infinity();
  } else {
    rep.kappa = normA / sigmin;
  }
  Eigen::BDCSVD<Matrix> svdD(Matrix(A - A_eps));
  rep.eps = svdD.singularValues().size() ? svdD.singularValues()(0) / normA : 0.0;
  rep.eps_kappa = rep.eps * rep.kappa;
  rep.precondition_ok = rep.eps_kappa < 1.0;

  const Vector x = Eigen::PartialPivLU<Matrix>(A).solve(b);
  const Vector b_eps = A_eps * x;
  rep.rel_b_err = (b - b_eps).norm() / b.norm();
  rep.b_bound = rep.eps_kappa;
  rep.b_within_bound = rep.rel_b_err <= rep.b_bound * (1 + 1e-12) + 1e-15;

  if (!rep.precondition_ok) {
    rep.x_bound = std::numeric_limits<double>::infinity();
    return rep;  // report only, nothing asserted
  }
  const Vector x_eps = Eigen::PartialPivLU<Matrix>(A_eps).solve(b);
  rep.rel_x_err = (x - x_eps).norm() / x.norm();
  rep.x_bound = rep.eps_kappa / (1.0 - rep.eps_kappa);
  rep.x_within_bound = rep.rel_x_err <= rep.x_bound * (1 + 1e-12) + 1e-15;
  return rep;
}

}  // namespace hbs
