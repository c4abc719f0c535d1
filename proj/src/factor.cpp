#include "hbs/factor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hbs {

Matrix MatrixSource::block(const std::vector<Index>& rows, const std::vector<Index>& cols) const {
  Matrix B(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) B(a, b) = entry(rows[a], cols[b]);
  return B;
}

NystromSource::NystromSource(KernelSpec spec, PointCloud cloud, RealVector weights)
    : spec_(std::move(spec)), cloud_(std::move(cloud)), weights_(std::move(weights)) {
  spec_.validate();
  cloud_.validate();
  if (weights_.size() != cloud_.size())
    throw std::invalid_argument("weight count must match point count");
}

Complex NystromSource::entry(Index i, Index j) const {
  if (i == j) return {1.0, 0.0};
  const double* xi = cloud_.point(i);
  const double* xj = cloud_.point(j);
  if (squared_distance(xi, xj, cloud_.dim) == 0.0)
    throw SingularEvaluationError("duplicate points in cloud", i, j);
  return weights_[j] * eval_kernel(spec_, xi, xj, cloud_.dim);
}

DenseSource::DenseSource(Matrix A, PointCloud cloud) : A_(std::move(A)), cloud_(std::move(cloud)) {
  if (A_.rows() != A_.cols()) throw std::invalid_argument("dense source must be square");
  if (A_.rows() != cloud_.size())
    throw std::invalid_argument("dense source dimension must match the point cloud");
}

Index LevelFactor::rows() const {
  Index s = 0;
  for (Index n : row_block_sizes) s += n;
  return s;
}
Index LevelFactor::cols() const {
  Index s = 0;
  for (Index n : col_block_sizes) s += n;
  return s;
}
Index LevelFactor::rank_rows() const {
  Index s = 0;
  for (const auto& sk : row_skel) s += static_cast<Index>(sk.size());
  return s;
}
Index LevelFactor::rank_cols() const {
  Index s = 0;
  for (const auto& sk : col_skel) s += static_cast<Index>(sk.size());
  return s;
}
Index LevelFactor::max_block_rows() const {
  Index m = 0;
  for (Index n : row_block_sizes) m = std::max(m, n);
  return m;
}
Index LevelFactor::max_rank() const {
  Index m = 0;
  for (const auto& sk : row_skel) m = std::max(m, static_cast<Index>(sk.size()));
  for (const auto& sk : col_skel) m = std::max(m, static_cast<Index>(sk.size()));
  return m;
}

namespace {

Vector spmv(const SparseMatrix& A, const Vector& x) {
  Vector y = Vector::Zero(A.rows());
  for (const Triplet& t : A.entries()) y[t.row] += t.value * x[t.col];
  return y;
}

Index count_nonzeros(const Matrix& M) {
  Index c = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (M(i, j) != Complex(0, 0)) ++c;
  return c;
}

Index auto_proxy_m(const KernelSpec* spec, int dim, double radius, Index configured) {
  if (configured > 0) return configured;
  Index m = dim == 3 ? 288 : 64;
  if (spec && spec->is_wave() && spec->kappa > 0) {
    // Oscillatory kernels need the proxy surface sampled at the wavelength.
    const double kr = spec->kappa * radius;
    if (dim == 3)
      m = std::max<Index>(m, static_cast<Index>(std::ceil(3.0 * kr * kr)) + 64);
    else
      m = std::max<Index>(m, static_cast<Index>(std::ceil(2.5 * kr)) + 32);
  }
  return m;
}

struct EngineLevel {
  std::vector<std::vector<Index>> row_act, col_act;  // global ids per block
  std::vector<Index> row_off, col_off;               // level-frame offsets
  Index nrow = 0, ncol = 0;
};

void fill_offsets(EngineLevel& lv) {
  lv.row_off.assign(lv.row_act.size() + 1, 0);
  lv.col_off.assign(lv.col_act.size() + 1, 0);
  for (std::size_t b = 0; b < lv.row_act.size(); ++b)
    lv.row_off[b + 1] = lv.row_off[b] + static_cast<Index>(lv.row_act[b].size());
  for (std::size_t b = 0; b < lv.col_act.size(); ++b)
    lv.col_off[b + 1] = lv.col_off[b] + static_cast<Index>(lv.col_act[b].size());
  lv.nrow = lv.row_off.back();
  lv.ncol = lv.col_off.back();
}

}  // namespace

std::pair<HBSFactors, FactorStats> hbs_compress(const MatrixSource& src, const SpatialTree& tree,
                                                const NearFarLists& nf,
                                                const CompressOptions& opts) {
  const auto clock_start = std::chrono::steady_clock::now();
  if (!(opts.tol > 0)) throw std::invalid_argument("compression tolerance must be > 0");
  if (!(opts.f >= 1)) throw std::invalid_argument("interpolation bound f must be >= 1");
  const Index N = src.size();
  if (tree.dim != src.cloud().dim || src.cloud().size() != N)
    throw std::invalid_argument("tree and system dimensions are inconsistent");
  {
    Index covered = 0;
    for (const TreeBlock& b : tree.level(0)) covered += static_cast<Index>(b.indices.size());
    if (covered != N) throw std::invalid_argument("tree does not cover the system's index set");
  }
  if (opts.use_proxy && src.kernel() == nullptr)
    throw std::invalid_argument("proxy compression requires a kernel-backed source");

  HBSFactors F;
  F.dim = tree.dim;
  F.N = N;
  const int d = tree.dim;
  const int L = tree.num_levels();

  F.perm.reserve(N);
  for (const TreeBlock& b : tree.level(0))
    F.perm.insert(F.perm.end(), b.indices.begin(), b.indices.end());

  // Per-point block id at the previous level, for the far-field mask.
  std::vector<int> prev_row_block(N, -1), prev_col_block(N, -1);
  // Skeleton globals of the previous level, grouped by previous-level block.
  std::vector<std::vector<Index>> skelg_row_prev, skelg_col_prev;

  EngineLevel lv;
  bool absorbed = false;

  // Entries of the running skeleton matrix: original values where the pair
  // was far at every finer level (equivalently, far at the previous level),
  // zero where a finer level already extracted it.
  const auto masked = [&](int l, Index gi, Index gj) -> Complex {
    if (l >= 2 && nf.is_near(l - 2, prev_row_block[gi], prev_col_block[gj])) return {0, 0};
    return src.entry(gi, gj);
  };

  for (int l = 1; l <= L - 1; ++l) {
    const auto& blocks = tree.level(l - 1);
    const auto& near = nf.near[l - 1];
    const int nb = static_cast<int>(blocks.size());

    if (l == 1) {
      lv.row_act.resize(nb);
      lv.col_act.resize(nb);
      for (int b = 0; b < nb; ++b) lv.row_act[b] = lv.col_act[b] = blocks[b].indices;
    } else {
      std::vector<std::vector<Index>> ract(nb), cact(nb);
      for (int b = 0; b < nb; ++b) {
        for (int c = blocks[b].child_begin; c < blocks[b].child_end; ++c) {
          ract[b].insert(ract[b].end(), skelg_row_prev[c].begin(), skelg_row_prev[c].end());
          cact[b].insert(cact[b].end(), skelg_col_prev[c].begin(), skelg_col_prev[c].end());
        }
      }
      lv.row_act = std::move(ract);
      lv.col_act = std::move(cact);
    }
    fill_offsets(lv);

    std::vector<char> is_near_flag(static_cast<std::size_t>(nb) * nb, 0);
    for (int a = 0; a < nb; ++a)
      for (int q : near[a]) is_near_flag[static_cast<std::size_t>(a) * nb + q] = 1;

    bool any_far = false;
    for (int a = 0; a < nb && !any_far; ++a) {
      if (lv.row_act[a].empty()) continue;
      for (int q = 0; q < nb; ++q)
        if (!is_near_flag[static_cast<std::size_t>(a) * nb + q] && !lv.col_act[q].empty()) {
          any_far = true;
          break;
        }
    }

    SparseMatrix D(lv.nrow, lv.ncol);
    for (int a = 0; a < nb; ++a) {
      const auto& rows = lv.row_act[a];
      for (int q : near[a]) {
        const auto& cols = lv.col_act[q];
        for (std::size_t ai = 0; ai < rows.size(); ++ai)
          for (std::size_t bj = 0; bj < cols.size(); ++bj) {
            const Complex v = masked(l, rows[ai], cols[bj]);
            if (v != Complex(0, 0))
              D.add(lv.row_off[a] + static_cast<Index>(ai), lv.col_off[q] + static_cast<Index>(bj), v);
          }
      }
    }
    D.finalize();

    if (!any_far) {
      F.D_last = std::move(D);
      absorbed = true;
      break;
    }

    // Per-block compression. Row side selects row skeletons against
    // [near columns | far columns inside the proxy ball | proxy columns];
    // the inner-far set is empty on uniform partitions and guards pruned
    // trees where a far cell of a smaller persisted leaf can protrude into
    // the proxy ball. Without proxy the exact far columns are used.
    const KernelSpec* kspec = src.kernel();
    const PointCloud& pts = src.cloud();

    std::vector<Matrix> Lb(nb), Rb(nb);
    std::vector<std::vector<Index>> rskel(nb), cskel(nb);
    std::vector<std::vector<Index>> skelg_row(nb), skelg_col(nb);

    for (int a = 0; a < nb; ++a) {
      const auto& rows = lv.row_act[a];
      const Index nP = static_cast<Index>(rows.size());
      Lb[a] = Matrix::Zero(nP, 0);
      if (nP == 0) continue;

      std::vector<Index> far_cols;
      for (int q = 0; q < nb; ++q)
        if (!is_near_flag[static_cast<std::size_t>(a) * nb + q])
          far_cols.insert(far_cols.end(), lv.col_act[q].begin(), lv.col_act[q].end());
      if (far_cols.empty()) continue;  // nothing to represent upward

      RowIDResult rid;
      if (opts.use_proxy) {
        const BoundingBox& box = blocks[a].box;
        const auto c = box.center();
        const double R = opts.proxy_radius_factor * box.circumradius();
        const Index m = auto_proxy_m(kspec, d, R, opts.proxy_m);
        const ProxySurface proxy = make_proxy(box, m, opts.proxy_radius_factor);

        std::vector<Index> cat_cols;
        for (int q : near[a])
          if (q != a) cat_cols.insert(cat_cols.end(), lv.col_act[q].begin(), lv.col_act[q].end());
        const double R2 = R * R;
        for (Index j : far_cols)
          if (squared_distance(pts.point(j), c.data(), d) < R2) cat_cols.push_back(j);

        BlockAccess access;
        access.submatrix = [&](const std::vector<Index>& rr, const std::vector<Index>& cc) {
          Matrix B(static_cast<Index>(rr.size()), static_cast<Index>(cc.size()));
          for (std::size_t i = 0; i < rr.size(); ++i)
            for (std::size_t j = 0; j < cc.size(); ++j) B(i, j) = masked(l, rr[i], cc[j]);
          return B;
        };
        access.proxy_block = [&](const std::vector<Index>& rr, const ProxySurface& px) {
          Matrix B(static_cast<Index>(rr.size()), px.size());
          for (std::size_t i = 0; i < rr.size(); ++i)
            for (Index p = 0; p < px.size(); ++p)
              B(i, p) = eval_kernel(*kspec, pts.point(rr[i]), px.points.point(p), d);
          return B;
        };
        rid = proxy_id(rows, cat_cols, true, access, proxy, box, opts.f, opts.tol);
      } else {
        Matrix X(nP, static_cast<Index>(far_cols.size()));
        for (Index i = 0; i < nP; ++i)
          for (std::size_t j = 0; j < far_cols.size(); ++j)
            X(i, j) = src.entry(rows[i], far_cols[j]);  // far pairs carry no mask
        rid = row_interp(X, opts.f, opts.tol);
      }
      Lb[a] = std::move(rid.basis);
      rskel[a] = std::move(rid.skeleton);
      skelg_row[a].reserve(rskel[a].size());
      for (Index s : rskel[a]) skelg_row[a].push_back(rows[s]);
    }

    for (int q = 0; q < nb; ++q) {
      const auto& cols = lv.col_act[q];
      const Index nQ = static_cast<Index>(cols.size());
      Rb[q] = Matrix::Zero(0, nQ);
      if (nQ == 0) continue;

      std::vector<Index> far_rows;
      for (int a = 0; a < nb; ++a)
        if (!is_near_flag[static_cast<std::size_t>(q) * nb + a])
          far_rows.insert(far_rows.end(), lv.row_act[a].begin(), lv.row_act[a].end());
      if (far_rows.empty()) continue;

      RowIDResult rid;
      if (opts.use_proxy) {
        const BoundingBox& box = blocks[q].box;
        const auto c = box.center();
        const double R = opts.proxy_radius_factor * box.circumradius();
        const Index m = auto_proxy_m(kspec, d, R, opts.proxy_m);
        const ProxySurface proxy = make_proxy(box, m, opts.proxy_radius_factor);

        std::vector<Index> cat_rows;
        for (int a : near[q])
          if (a != q) cat_rows.insert(cat_rows.end(), lv.row_act[a].begin(), lv.row_act[a].end());
        const double R2 = R * R;
        for (Index i : far_rows)
          if (squared_distance(pts.point(i), c.data(), d) < R2) cat_rows.push_back(i);

        // Column side works on the transpose: rows of the access functors
        // are the block's column indices.
        BlockAccess access;
        access.submatrix = [&](const std::vector<Index>& cc, const std::vector<Index>& rr) {
          Matrix B(static_cast<Index>(cc.size()), static_cast<Index>(rr.size()));
          for (std::size_t jw = 0; jw < cc.size(); ++jw)
            for (std::size_t iw = 0; iw < rr.size(); ++iw) B(jw, iw) = masked(l, rr[iw], cc[jw]);
          return B;
        };
        access.proxy_block = [&](const std::vector<Index>& cc, const ProxySurface& px) {
          Matrix B(static_cast<Index>(cc.size()), px.size());
          for (std::size_t jw = 0; jw < cc.size(); ++jw)
            for (Index p = 0; p < px.size(); ++p)
              B(jw, p) = src.weight(cc[jw]) *
                         eval_kernel(*kspec, px.points.point(p), pts.point(cc[jw]), d);
          return B;
        };
        rid = proxy_id(cols, cat_rows, true, access, proxy, box, opts.f, opts.tol);
      } else {
        Matrix X(static_cast<Index>(far_rows.size()), nQ);
        for (std::size_t i = 0; i < far_rows.size(); ++i)
          for (Index j = 0; j < nQ; ++j) X(i, j) = src.entry(far_rows[i], cols[j]);
        const IDResult cid = interp_decompose(X, opts.f, opts.tol);
        rid.skeleton = cid.skeleton;
        rid.basis = cid.P.transpose();
        rid.achieved_tol = cid.achieved_tol;
      }
      Rb[q] = rid.basis.transpose();
      cskel[q] = std::move(rid.skeleton);
      skelg_col[q].reserve(cskel[q].size());
      for (Index s : cskel[q]) skelg_col[q].push_back(cols[s]);
    }

    Index krow = 0, kcol = 0;
    for (int b = 0; b < nb; ++b) {
      krow += static_cast<Index>(rskel[b].size());
      kcol += static_cast<Index>(cskel[b].size());
    }

    if (krow == 0 || kcol == 0) {
      // The far field vanished numerically; D_l is the whole remainder.
      F.D_last = std::move(D);
      absorbed = true;
      break;
    }
    if (krow == lv.nrow && kcol == lv.ncol) {
      // No compression happened; absorb the remainder (near and far) densely
      // instead of stacking useless levels.
      SparseMatrix Dfull(lv.nrow, lv.ncol);
      for (int a = 0; a < nb; ++a)
        for (int q = 0; q < nb; ++q) {
          const auto& rows = lv.row_act[a];
          const auto& cols = lv.col_act[q];
          for (std::size_t ai = 0; ai < rows.size(); ++ai)
            for (std::size_t bj = 0; bj < cols.size(); ++bj) {
              const Complex v = masked(l, rows[ai], cols[bj]);
              if (v != Complex(0, 0))
                Dfull.add(lv.row_off[a] + static_cast<Index>(ai),
                          lv.col_off[q] + static_cast<Index>(bj), v);
            }
        }
      Dfull.finalize();
      F.D_last = std::move(Dfull);
      absorbed = true;
      break;
    }

    LevelFactor lf;
    lf.row_block_sizes.resize(nb);
    lf.col_block_sizes.resize(nb);
    for (int b = 0; b < nb; ++b) {
      lf.row_block_sizes[b] = static_cast<Index>(lv.row_act[b].size());
      lf.col_block_sizes[b] = static_cast<Index>(lv.col_act[b].size());
    }
    lf.L_blocks = std::move(Lb);
    lf.R_blocks = std::move(Rb);
    lf.row_skel = std::move(rskel);
    lf.col_skel = std::move(cskel);
    lf.D = std::move(D);
    F.levels.push_back(std::move(lf));

    for (int b = 0; b < nb; ++b) {
      for (Index g : lv.row_act[b]) prev_row_block[g] = b;
      for (Index g : lv.col_act[b]) prev_col_block[g] = b;
    }
    skelg_row_prev = std::move(skelg_row);
    skelg_col_prev = std::move(skelg_col);
  }

  if (!absorbed) {
    // Only possible for a single-level tree (root box holds everything):
    // sibling blocks always touch, so the loop otherwise terminates inside.
    if (!F.levels.empty()) throw NumericalError("compression did not terminate");
    SparseMatrix Dfull(N, N);
    for (std::size_t a = 0; a < F.perm.size(); ++a)
      for (std::size_t b = 0; b < F.perm.size(); ++b) {
        const Complex v = src.entry(F.perm[a], F.perm[b]);
        if (v != Complex(0, 0)) Dfull.add(static_cast<Index>(a), static_cast<Index>(b), v);
      }
    Dfull.finalize();
    F.D_last = std::move(Dfull);
  }
  F.depth = static_cast<int>(F.levels.size());

  FactorStats stats;
  stats.entry_bound = 0;
  for (const LevelFactor& lf : F.levels) {
    stats.nnz_per_factor.push_back(lf.D.nnz());
    Index lnnz = 0, rnnz = 0;
    double lmax = 0;
    for (const Matrix& Lbk : lf.L_blocks) {
      lnnz += count_nonzeros(Lbk);
      if (Lbk.size()) lmax = std::max(lmax, Lbk.cwiseAbs().maxCoeff());
    }
    stats.nnz_per_factor.push_back(lnnz);
    for (const Matrix& Rbk : lf.R_blocks) {
      rnnz += count_nonzeros(Rbk);
      if (Rbk.size()) lmax = std::max(lmax, Rbk.cwiseAbs().maxCoeff());
    }
    stats.nnz_per_factor.push_back(rnnz);
    stats.entry_bound = std::max({stats.entry_bound, lf.D.max_abs(), lmax});
    stats.max_rank = std::max(stats.max_rank, lf.max_rank());
  }
  stats.nnz_per_factor.push_back(F.D_last.nnz());
  stats.entry_bound = std::max(stats.entry_bound, F.D_last.max_abs());
  for (Index c : stats.nnz_per_factor) stats.nnz_total += c;
  stats.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return {std::move(F), std::move(stats)};
}

namespace {

Matrix assemble_block_diag(const std::vector<Matrix>& blocks, bool transpose_blocks) {
  Index rows = 0, cols = 0;
  for (const Matrix& b : blocks) {
    rows += transpose_blocks ? b.cols() : b.rows();
    cols += transpose_blocks ? b.rows() : b.cols();
  }
  Matrix M = Matrix::Zero(rows, cols);
  Index r = 0, c = 0;
  for (const Matrix& b : blocks) {
    const Index br = transpose_blocks ? b.cols() : b.rows();
    const Index bc = transpose_blocks ? b.rows() : b.cols();
    if (br && bc) M.block(r, c, br, bc) = transpose_blocks ? b.transpose() : b;
    r += br;
    c += bc;
  }
  return M;
}

}  // namespace

Matrix reconstruct(const HBSFactors& F) {
  if (F.N > 4096)
    throw std::invalid_argument("reconstruct is limited to N <= 4096; use apply instead");

  Matrix M = F.D_last.to_dense();
  for (int l = F.depth; l >= 1; --l) {
    const LevelFactor& lf = F.levels[l - 1];
    const Matrix Lmat = assemble_block_diag(lf.L_blocks, false);
    const Matrix Rmat = assemble_block_diag(lf.R_blocks, false);
    M = lf.D.to_dense() + Lmat * (M * Rmat);
  }
  Matrix A(F.N, F.N);
  for (Index r = 0; r < F.N; ++r)
    for (Index c = 0; c < F.N; ++c) A(F.perm[r], F.perm[c]) = M(r, c);
  return A;
}

Vector apply(const HBSFactors& F, const Vector& v) {
  if (v.size() != F.N) throw std::invalid_argument("apply: length mismatch");
  Vector w(F.N);
  for (Index r = 0; r < F.N; ++r) w[r] = v[F.perm[r]];

  std::vector<Vector> zs;
  zs.reserve(F.depth);
  const Vector* cur = &w;
  for (int l = 1; l <= F.depth; ++l) {
    const LevelFactor& lf = F.levels[l - 1];
    Vector z(lf.rank_cols());
    Index zoff = 0, noff = 0;
    for (const Matrix& Rbk : lf.R_blocks) {
      if (Rbk.rows()) z.segment(zoff, Rbk.rows()) = Rbk * cur->segment(noff, Rbk.cols());
      zoff += Rbk.rows();
      noff += Rbk.cols();
    }
    zs.push_back(std::move(z));
    cur = &zs.back();
  }

  Vector s = spmv(F.D_last, F.depth ? zs.back() : w);
  for (int l = F.depth; l >= 1; --l) {
    const LevelFactor& lf = F.levels[l - 1];
    Vector out = spmv(lf.D, l == 1 ? w : zs[l - 2]);
    Index roff = 0, koff = 0;
    for (const Matrix& Lbk : lf.L_blocks) {
      if (Lbk.cols()) out.segment(roff, Lbk.rows()) += Lbk * s.segment(koff, Lbk.cols());
      roff += Lbk.rows();
      koff += Lbk.cols();
    }
    s = std::move(out);
  }

  Vector result(F.N);
  for (Index r = 0; r < F.N; ++r) result[F.perm[r]] = s[r];
  return result;
}

CountModel predict_counts(const CountParams& p, int lambda) {
  if (p.N <= 0 || p.r < 1 || p.n1 < 1 || lambda < 0)
    throw std::invalid_argument("predict_counts: parameters must be positive");
  const double d2 = std::pow(2.0, p.d);
  const double d3 = std::pow(3.0, p.d);
  const double d4 = std::pow(4.0, p.d);
  const double d6 = std::pow(6.0, p.d);
  const double r = p.r;
  const double grow = std::pow(2.0, static_cast<double>(p.d) * lambda) - 1.0;

  CountModel model;
  model.s_pred = d3 * p.n1 * p.N +
                 d2 * ((2.0 * d2 * r * r - 2.0 * r * r + 4.0 * r) * grow + d4 * (d6 - d3) * r * r * grow) /
                     (d2 - 1.0);
  model.t_model = 2.0 * d2 * (p.m * r * std::log(std::max(r, 1.0)) + r * r * r) *
                  (std::pow(2.0, static_cast<double>(p.d) * (lambda + 1)) - d2) / (d2 - 1.0);
  return model;
}

}  // namespace hbs
