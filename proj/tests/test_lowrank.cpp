#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hbs/kernels.hpp"
#include "hbs/lowrank.hpp"
#include "hbs/rng.hpp"
#include "oracles.hpp"

using namespace hbs;

namespace {

Matrix reconstruct_id(const Matrix& M, const IDResult& id) {
  Matrix skel(M.rows(), static_cast<Index>(id.skeleton.size()));
  for (std::size_t k = 0; k < id.skeleton.size(); ++k) skel.col(k) = M.col(id.skeleton[k]);
  return skel * id.P;
}

// Checks the strong RRQR contract of one factorization against dense SVDs:
// |T| <= f, and the interlacing bounds with q1 = sqrt(1 + f^2 k (n-k)).
void check_strong_rrqr(const Matrix& M, const RRQRResult& r, double f) {
  const Index n = M.cols(), k = r.rank;
  for (Index i = 0; i < r.T.rows(); ++i)
    for (Index j = 0; j < r.T.cols(); ++j) CHECK(std::abs(r.T(i, j)) <= f * (1 + 1e-12));

  if (k == 0 || k == std::min(M.rows(), n)) return;
  const double q1 = std::sqrt(1.0 + f * f * k * (n - k));
  Matrix Mk(M.rows(), k), Mrest(M.rows(), n - k);
  for (Index j = 0; j < k; ++j) Mk.col(j) = M.col(r.perm[j]);
  for (Index j = k; j < n; ++j) Mrest.col(j - k) = M.col(r.perm[j]);
  const auto sM = oracle::singular_values(M);
  const auto sA = oracle::singular_values(Mk);  // sigma_i(A_k) = sigma_i of the pivot columns
  for (Index i = 0; i < k; ++i) CHECK(sA(i) >= sM(i) / q1 * (1 - 1e-10));
  // sigma_j(C_k): residual of the trailing columns against the pivot span
  Eigen::HouseholderQR<Matrix> qr(Mk);
  Matrix Q = qr.householderQ() * Matrix::Identity(M.rows(), k);
  const Matrix C = Mrest - Q * (Q.adjoint() * Mrest);
  const auto sC = oracle::singular_values(C);
  const Index jmax = std::min<Index>(sC.size(), sM.size() - k);
  for (Index j = 0; j < jmax; ++j)
    CHECK(sC(j) <= sM(k + j) * q1 * (1 + 1e-10) + 1e-13 * sM(0));
}

}  // namespace

TEST_CASE("identity matrix at tol 0 keeps full rank with an empty T") {
  const Matrix I2 = Matrix::Identity(2, 2);
  const RRQRResult r = strong_rrqr(I2, 2.0, 0.0);
  CHECK(r.rank == 2);
  CHECK(r.T.rows() == 2);
  CHECK(r.T.cols() == 0);
  CHECK(r.perm == std::vector<Index>{0, 1});
}

TEST_CASE("rank-1 2x2 example with entry bound") {
  Matrix M(2, 2);
  M << 1, 2, 2, 4;
  const RRQRResult r = strong_rrqr(M, 2.0, 1e-12);
  CHECK(r.rank == 1);  // SVD oracle: sigma_2 = 0
  CHECK(oracle::singular_values(M)(1) <= 1e-14 * oracle::singular_values(M)(0));
  REQUIRE(r.T.size() == 1);
  CHECK(std::abs(r.T(0, 0)) <= 2.0);
  // reconstruction through the ID is exact to roundoff
  const IDResult id = interp_decompose(M, 2.0, 1e-12);
  CHECK((M - reconstruct_id(M, id)).norm() <= 1e-14 * M.norm());
}

TEST_CASE("exact rank-3 16x16 product is recovered with both sigma bounds") {
  Xorshift64Star rng(1234);
  const Matrix M = oracle::random_rank_k(16, 16, 3, rng);
  const RRQRResult r = strong_rrqr(M, 2.0, 1e-12);
  CHECK(r.rank == 3);
  check_strong_rrqr(M, r, 2.0);
}

TEST_CASE("non-finite input is rejected") {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(strong_rrqr(M, 2.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(strong_rrqr(Matrix::Identity(2, 2), 0.5, 1e-10), std::invalid_argument);
}

TEST_CASE("zero matrix decomposes to rank 0") {
  const Matrix Z = Matrix::Zero(8, 5);
  const IDResult id = interp_decompose(Z, 2.0, 1e-10);
  CHECK(id.skeleton.empty());
  CHECK(id.P.rows() == 0);
  CHECK(reconstruct_id(Z, id).norm() == 0.0);
}

TEST_CASE("duplicated column collapses to rank 1 with P = [1, 1]") {
  Xorshift64Star rng(7);
  Matrix M(6, 2);
  M.col(0) = oracle::random_matrix(6, 1, rng);
  M.col(1) = M.col(0);
  const IDResult id = interp_decompose(M, 2.0, 1e-12);
  REQUIRE(id.skeleton.size() == 1);
  CHECK(std::abs(id.P(0, 0) - Complex(1, 0)) <= 1e-14);
  CHECK(std::abs(id.P(0, 1) - Complex(1, 0)) <= 1e-14);
}

TEST_CASE("log-kernel block between separated boxes compresses hard") {
  // 32 x 32 block of log|x-y| between two unit boxes at distance 4
  Xorshift64Star rng(42);
  Matrix M(32, 32);
  std::vector<std::array<double, 2>> xs, ys;
  for (int i = 0; i < 32; ++i) {
    xs.push_back({rng.uniform(), rng.uniform()});
    ys.push_back({5.0 + rng.uniform(), rng.uniform()});
  }
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const double dx = xs[i][0] - ys[j][0], dy = xs[i][1] - ys[j][1];
      M(i, j) = 0.5 * std::log(dx * dx + dy * dy);
    }
  const IDResult id = interp_decompose(M, 2.0, 1e-10);
  CHECK(id.skeleton.size() <= 20);
  CHECK((M - reconstruct_id(M, id)).norm() / M.norm() <= 1e-9);
}

TEST_CASE("identity submatrix of P is exact and entries bounded") {
  Xorshift64Star rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 4 + static_cast<Index>(rng.uniform() * 28);
    const Index n = 4 + static_cast<Index>(rng.uniform() * 28);
    const Index k = 1 + static_cast<Index>(rng.uniform() * std::min(m, n) * 0.5);
    const Matrix M = oracle::random_rank_k(m, n, k, rng);
    const IDResult id = interp_decompose(M, 2.0, 1e-10);
    for (std::size_t a = 0; a < id.skeleton.size(); ++a)
      for (std::size_t b = 0; b < id.skeleton.size(); ++b) {
        const Complex want = a == b ? Complex(1, 0) : Complex(0, 0);
        CHECK(id.P(a, id.skeleton[b]) == want);  // exact, no roundoff allowance
      }
    for (Index i = 0; i < id.P.rows(); ++i)
      for (Index j = 0; j < id.P.cols(); ++j) CHECK(std::abs(id.P(i, j)) <= 2.0 * (1 + 1e-12));
  }
}

TEST_CASE("strong RRQR bounds hold on 100 random matrices up to 64x64") {
  Xorshift64Star rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 2 + static_cast<Index>(rng.uniform() * 62);
    const Index n = 2 + static_cast<Index>(rng.uniform() * 62);
    Matrix M;
    switch (trial % 3) {
      case 0:
        M = oracle::random_matrix(m, n, rng);
        break;
      case 1:
        M = oracle::random_rank_k(m, n, 1 + static_cast<Index>(rng.uniform() * 8), rng);
        break;
      default: {
        // rapidly decaying spectrum
        M = oracle::random_matrix(m, n, rng);
        Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        RealVector s = svd.singularValues();
        for (Index i = 0; i < s.size(); ++i) s(i) = std::pow(10.0, -0.8 * i);
        M = svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
        break;
      }
    }
    const double f = trial % 2 ? 2.0 : 1.5;
    const RRQRResult r = strong_rrqr(M, f, 1e-8);
    check_strong_rrqr(M, r, f);
  }
}

TEST_CASE("identical input bits give identical results") {
  Xorshift64Star rng(5);
  const Matrix M = oracle::random_matrix(24, 31, rng);
  const RRQRResult a = strong_rrqr(M, 2.0, 1e-6);
  const RRQRResult b = strong_rrqr(M, 2.0, 1e-6);
  CHECK(a.rank == b.rank);
  CHECK(a.perm == b.perm);
  CHECK(a.T == b.T);
  CHECK(a.r_diag == b.r_diag);
}

namespace {

// Shared fixture for the proxy tests: a 1D Coulomb line with one mid block.
struct ProxyFixture {
  PointCloud cloud;
  RealVector weights;
  std::vector<Index> block_rows, near_cols, far_cols;
  BoundingBox box;
  KernelSpec spec{KernelFamily::coulomb3d};

  explicit ProxyFixture(Index n = 512) {
    cloud = uniform_line(n);
    weights = RealVector::Constant(n, 1.0 / static_cast<double>(n));
    // block = [0.25, 0.3125): one leaf of a 16-block uniform split
    const double lo = 4.0 / 16.0, hi = 5.0 / 16.0;
    for (Index i = 0; i < n; ++i) {
      const double x = cloud.point(i)[0];
      if (x >= lo && x < hi)
        block_rows.push_back(i);
      else if (x >= lo - 1.0 / 16.0 && x < hi + 1.0 / 16.0)
        near_cols.push_back(i);
      else
        far_cols.push_back(i);
    }
    box.dim = 1;
    box.lo = {lo, 0, 0};
    box.hi = {hi, 0, 0};
  }

  BlockAccess access() const {
    BlockAccess a;
    a.submatrix = [this](const std::vector<Index>& rr, const std::vector<Index>& cc) {
      Matrix B(static_cast<Index>(rr.size()), static_cast<Index>(cc.size()));
      for (std::size_t i = 0; i < rr.size(); ++i)
        for (std::size_t j = 0; j < cc.size(); ++j)
          B(i, j) = weights[cc[j]] * eval_kernel(spec, cloud.point(rr[i]), cloud.point(cc[j]), 1);
      return B;
    };
    a.proxy_block = [this](const std::vector<Index>& rr, const ProxySurface& px) {
      Matrix B(static_cast<Index>(rr.size()), px.size());
      for (std::size_t i = 0; i < rr.size(); ++i)
        for (Index p = 0; p < px.size(); ++p)
          B(i, p) = eval_kernel(spec, cloud.point(rr[i]), px.points.point(p), 1);
      return B;
    };
    return a;
  }

  Matrix far_block() const {
    Matrix X(static_cast<Index>(block_rows.size()), static_cast<Index>(far_cols.size()));
    for (std::size_t i = 0; i < block_rows.size(); ++i)
      for (std::size_t j = 0; j < far_cols.size(); ++j)
        X(i, j) = weights[far_cols[j]] *
                  eval_kernel(spec, cloud.point(block_rows[i]), cloud.point(far_cols[j]), 1);
    return X;
  }

  double residual(const RowIDResult& rid) const {
    const Matrix X = far_block();
    Matrix Xs(static_cast<Index>(rid.skeleton.size()), X.cols());
    for (std::size_t k = 0; k < rid.skeleton.size(); ++k) Xs.row(k) = X.row(rid.skeleton[k]);
    return (X - rid.basis * Xs).norm() / X.norm();
  }
};

}  // namespace

TEST_CASE("proxy skeleton reproduces the dense far field") {
  const ProxyFixture fx;
  const double tol = 1e-8;
  const ProxySurface proxy = make_proxy(fx.box, 64, 1.5);
  const RowIDResult rid = proxy_id(fx.block_rows, fx.near_cols, true, fx.access(), proxy, fx.box,
                                   2.0, tol);
  CHECK(fx.residual(rid) <= 10 * tol);

  // cross-check against the dense global row ID
  const RowIDResult global = row_interp(fx.far_block(), 2.0, tol);
  CHECK(fx.residual(global) <= 10 * tol);
  CHECK(static_cast<double>(rid.skeleton.size()) <=
        std::max<double>(8.0, 2.0 * static_cast<double>(global.skeleton.size())));
}

TEST_CASE("doubling the proxy count saturates the residual") {
  const ProxyFixture fx;
  const double tol = 1e-8;
  std::vector<double> residuals;
  for (Index m : {32, 64, 128}) {
    const ProxySurface proxy = make_proxy(fx.box, m, 1.5);
    const RowIDResult rid = proxy_id(fx.block_rows, fx.near_cols, true, fx.access(), proxy,
                                     fx.box, 2.0, tol);
    residuals.push_back(fx.residual(rid));
  }
  CHECK(std::abs(residuals[1] - residuals[2]) < tol);
}

TEST_CASE("empty far field reduces proxy_id to the near columns") {
  const ProxyFixture fx;
  const ProxySurface proxy = make_proxy(fx.box, 16, 1.5);
  const RowIDResult rid = proxy_id(fx.block_rows, {}, false, fx.access(), proxy, fx.box, 2.0,
                                   1e-8);
  CHECK(rid.skeleton.empty());  // nothing to interpolate
}

TEST_CASE("a proxy inside the box is rejected") {
  const ProxyFixture fx;
  ProxySurface inside;
  inside.points.dim = 1;
  const double mid = 0.5 * (fx.box.lo[0] + fx.box.hi[0]);
  inside.points.append(&mid);
  inside.center = {mid, 0, 0};
  inside.radius = 2 * fx.box.circumradius();
  CHECK_THROWS_AS(
      proxy_id(fx.block_rows, fx.near_cols, true, fx.access(), inside, fx.box, 2.0, 1e-8),
      std::invalid_argument);
}
