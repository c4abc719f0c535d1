#pragma once

#include <memory>
#include <vector>

#include "hbs/common.hpp"
#include "hbs/geometry.hpp"
#include "hbs/kernels.hpp"
#include "hbs/lowrank.hpp"
#include "hbs/sparsematrix.hpp"

namespace hbs {

// Entry access to the system matrix. A kernel-backed source evaluates entries
// on demand, which keeps compression at O(N) memory; a dense source wraps an
// assembled matrix (no proxy support since proxy columns need the kernel).
class MatrixSource {
 public:
  virtual ~MatrixSource() = default;
  virtual Index size() const = 0;
  virtual Complex entry(Index i, Index j) const = 0;
  virtual const PointCloud& cloud() const = 0;
  virtual const KernelSpec* kernel() const { return nullptr; }
  virtual double weight(Index j) const { return 1.0; }

  Matrix block(const std::vector<Index>& rows, const std::vector<Index>& cols) const;
};

class NystromSource final : public MatrixSource {
 public:
  NystromSource(KernelSpec spec, PointCloud cloud, RealVector weights);
  Index size() const override { return cloud_.size(); }
  Complex entry(Index i, Index j) const override;
  const PointCloud& cloud() const override { return cloud_; }
  const KernelSpec* kernel() const override { return &spec_; }
  double weight(Index j) const override { return weights_[j]; }

 private:
  KernelSpec spec_;
  PointCloud cloud_;
  RealVector weights_;
};

class DenseSource final : public MatrixSource {
 public:
  DenseSource(Matrix A, PointCloud cloud);
  explicit DenseSource(const DenseSystem& sys) : DenseSource(sys.A, sys.cloud) {}
  Index size() const override { return A_.rows(); }
  Complex entry(Index i, Index j) const override { return A_(i, j); }
  const PointCloud& cloud() const override { return cloud_; }

 private:
  Matrix A_;
  PointCloud cloud_;
};

// One level of the telescoping factorization. All index frames are local to
// the level: level 1 positions map to original indices through
// HBSFactors::perm, level l+1 positions are offsets into the concatenation of
// level-l skeletons (block order is parent order, so no extra reordering is
// needed between levels).
struct LevelFactor {
  std::vector<Index> row_block_sizes, col_block_sizes;
  std::vector<Matrix> L_blocks;                         // n_P x k_P, identity rows on the skeleton
  std::vector<Matrix> R_blocks;                         // k_Q x n_Q, identity columns on the skeleton
  std::vector<std::vector<Index>> row_skel, col_skel;   // per block, positions within the block
  SparseMatrix D;

  Index rows() const;
  Index cols() const;
  Index rank_rows() const;
  Index rank_cols() const;
  Index max_block_rows() const;
  Index max_rank() const;
};

struct HBSFactors {
  int dim = 1;
  Index N = 0;
  std::vector<Index> perm;         // level-1 position -> original index
  int depth = 0;                   // lambda
  std::vector<LevelFactor> levels; // size lambda
  SparseMatrix D_last;             // D_{lambda+1} in the level-lambda skeleton frame
  double t = 1.0;                  // scaling parameter used by default at assembly
};

struct FactorStats {
  Index nnz_total = 0;
  std::vector<Index> nnz_per_factor;  // D_1, L_1, R_1, D_2, ..., D_{lambda+1}
  Index max_rank = 0;
  double runtime_seconds = 0;
  double entry_bound = 0;  // c_sp: max |entry| over all factors
};

struct CompressOptions {
  double tol = 1e-10;
  double f = 2.0;
  bool use_proxy = true;
  Index proxy_m = 0;  // 0 = auto: 64 (d <= 2) or 288 (d = 3) plus a wave-resolution floor
  double proxy_radius_factor = 1.5;
};

std::pair<HBSFactors, FactorStats> hbs_compress(const MatrixSource& src, const SpatialTree& tree,
                                                const NearFarLists& nf,
                                                const CompressOptions& opts);

/// Dense evaluation of D_1 + L_1 (D_2 + ...) R_1 in the original index order.
/// Guarded to N <= 4096.
Matrix reconstruct(const HBSFactors& factors);

/// Fast matvec through the telescoping form, O(N).
Vector apply(const HBSFactors& factors, const Vector& v);

struct CountParams {
  int d = 1;
  double N = 0;
  double M = 0;   // leaf size (enters through lambda)
  double r = 1;   // rank bound
  double n1 = 1;  // finest block size
  double m = 64;  // proxy set size
};

struct CountModel {
  double s_pred = 0;   // nonzero count
  double t_model = 0;  // runtime model
};

/// Closed-form nonzero and runtime predictors,
/// s = 3^d n1 N + 2^d[(2^{d+1}r^2-2r^2+4r)(2^{d lambda}-1)
///     + 4^d(6^d-3^d)r^2(2^{d lambda}-1)]/(2^d-1),
/// T = 2^{d+1}(m r log r + r^3)(2^{d(lambda+1)}-2^d)/(2^d-1).
CountModel predict_counts(const CountParams& params, int lambda);

}  // namespace hbs
