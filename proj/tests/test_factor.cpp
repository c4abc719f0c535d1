#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "hbs/factor.hpp"
#include "hbs/io.hpp"
#include "hbs/rng.hpp"
#include "oracles.hpp"

using namespace hbs;

namespace {

struct Instance {
  PointCloud cloud;
  RealVector weights;
  SpatialTree tree;
  NearFarLists nf;
  KernelSpec spec;
};

Instance make_line_instance(Index n, KernelFamily family, double p = 1.0, Index leaf = 32) {
  Instance inst;
  inst.cloud = uniform_line(n);
  inst.weights = RealVector::Constant(n, 1.0 / static_cast<double>(n));
  inst.tree = build_tree(inst.cloud, leaf);
  inst.nf = mark_near_far(inst.tree);
  inst.spec.family = family;
  inst.spec.p = p;
  return inst;
}

Matrix dense_of(const Instance& inst) {
  return assemble_nystrom(inst.spec, inst.cloud, inst.weights).A;
}

}  // namespace

TEST_CASE("diagonal matrix compresses to D_1 alone with exact reconstruction") {
  const Index n = 64;
  PointCloud cloud = uniform_line(n);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) A(i, i) = Complex(1.0 + i, -0.5 * i);
  const SpatialTree tree = build_tree(cloud, 8);
  const NearFarLists nf = mark_near_far(tree);
  DenseSource src(A, cloud);
  CompressOptions opts;
  opts.tol = 1e-12;
  opts.use_proxy = false;
  auto [factors, stats] = hbs_compress(src, tree, nf, opts);

  CHECK(factors.depth == 0);  // every far block has rank 0, L and R stay empty
  CHECK(factors.levels.empty());
  CHECK((reconstruct(factors) - A).norm() == 0.0);
  CHECK(stats.max_rank == 0);
}

TEST_CASE("1D Coulomb reconstruction meets the tolerance") {
  const Instance inst = make_line_instance(1024, KernelFamily::coulomb3d, 1.0, 64);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-8;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);
  CHECK(factors.depth >= 2);

  const Matrix A = dense_of(inst);
  const Matrix R = reconstruct(factors);
  CHECK((A - R).norm() / A.norm() <= 1e-6);
  CHECK(stats.nnz_total < 1024 * 1024 / 4);  // genuinely sparse
  CHECK(stats.runtime_seconds >= 0);
}

TEST_CASE("random power-law instance reconstructs to 1e-8") {
  Instance inst;
  inst.cloud = perturbed_line(256, 99);
  inst.weights = RealVector::Constant(256, 1.0 / 256.0);
  inst.tree = build_tree(inst.cloud, 32);
  inst.nf = mark_near_far(inst.tree);
  inst.spec.family = KernelFamily::powerlaw;
  inst.spec.p = 1.0;
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-10;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);
  const Matrix A = dense_of(inst);
  CHECK((A - reconstruct(factors)).norm() / A.norm() <= 1e-8);
}

TEST_CASE("telescoping dimension chain and entry bounds hold") {
  const Instance inst = make_line_instance(512, KernelFamily::coulomb3d, 1.0, 32);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-8;
  opts.f = 2.0;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);

  const double max_abs_A = [&] {
    const Matrix A = dense_of(inst);
    return A.cwiseAbs().maxCoeff();
  }();

  for (int l = 0; l < factors.depth; ++l) {
    const LevelFactor& lf = factors.levels[l];
    // n_{l+1} = sum of this level's skeleton sizes
    if (l + 1 < factors.depth) {
      CHECK(factors.levels[l + 1].rows() == lf.rank_rows());
      CHECK(factors.levels[l + 1].cols() == lf.rank_cols());
      // each child block contributes at most 2^d skeletons to its parent
      const auto& next = factors.levels[l + 1];
      for (std::size_t b = 0; b < next.row_block_sizes.size(); ++b)
        CHECK(next.row_block_sizes[b] <= (Index(1) << inst.tree.dim) * std::max<Index>(1, lf.max_rank()));
    } else {
      CHECK(factors.D_last.rows() == lf.rank_rows());
      CHECK(factors.D_last.cols() == lf.rank_cols());
    }
    for (const Matrix& Lb : lf.L_blocks)
      if (Lb.size()) CHECK(Lb.cwiseAbs().maxCoeff() <= opts.f * (1 + 1e-12));
    for (const Matrix& Rb : lf.R_blocks)
      if (Rb.size()) CHECK(Rb.cwiseAbs().maxCoeff() <= opts.f * (1 + 1e-12));
    CHECK(lf.D.max_abs() <= max_abs_A * (1 + 1e-12));
  }
  CHECK(stats.entry_bound <= std::max(max_abs_A, opts.f) * (1 + 1e-12));
}

TEST_CASE("identity submatrices appear in every interpolation block") {
  const Instance inst = make_line_instance(256, KernelFamily::powerlaw, 2.0, 32);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-9;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);
  REQUIRE(factors.depth >= 1);
  for (const LevelFactor& lf : factors.levels) {
    for (std::size_t b = 0; b < lf.L_blocks.size(); ++b) {
      const Matrix& Lb = lf.L_blocks[b];
      const auto& skel = lf.row_skel[b];
      for (std::size_t i = 0; i < skel.size(); ++i)
        for (std::size_t j = 0; j < skel.size(); ++j)
          CHECK(Lb(skel[i], j) == (i == j ? Complex(1, 0) : Complex(0, 0)));
    }
    for (std::size_t b = 0; b < lf.R_blocks.size(); ++b) {
      const Matrix& Rb = lf.R_blocks[b];
      const auto& skel = lf.col_skel[b];
      for (std::size_t i = 0; i < skel.size(); ++i)
        for (std::size_t j = 0; j < skel.size(); ++j)
          CHECK(Rb(i, skel[j]) == (i == j ? Complex(1, 0) : Complex(0, 0)));
    }
  }
}

TEST_CASE("apply matches the dense reconstruction") {
  const Instance inst = make_line_instance(512, KernelFamily::coulomb3d, 1.0, 64);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-9;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);

  SUBCASE("zero maps to zero") {
    const Vector z = Vector::Zero(512);
    CHECK(hbs::apply(factors, z).norm() == 0.0);
  }
  SUBCASE("random vector") {
    Xorshift64Star rng(31);
    Vector v(512);
    for (Index i = 0; i < 512; ++i) v[i] = rng.cnormal();
    const Matrix R = reconstruct(factors);
    const Vector want = R * v;
    const Vector got = hbs::apply(factors, v);
    CHECK((want - got).norm() <= 1e-12 * R.norm() * v.norm());
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(hbs::apply(factors, Vector::Zero(100)), std::invalid_argument);
  }
}

TEST_CASE("apply on basis vectors reproduces every reconstruction column") {
  const Instance inst = make_line_instance(192, KernelFamily::powerlaw, 1.5, 24);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-10;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);
  const Matrix R = reconstruct(factors);
  for (Index j = 0; j < 192; ++j) {
    Vector e = Vector::Zero(192);
    e[j] = 1.0;
    CHECK((hbs::apply(factors, e) - R.col(j)).norm() <= 1e-12 * R.norm());
  }
}

TEST_CASE("apply on a diagonal system is entrywise D_1 v") {
  const Index n = 32;
  PointCloud cloud = uniform_line(n);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) A(i, i) = Complex(2.0 + i, 1.0);
  DenseSource src(A, cloud);
  const SpatialTree tree = build_tree(cloud, 8);
  CompressOptions opts;
  opts.tol = 1e-12;
  opts.use_proxy = false;
  auto [factors, stats] = hbs_compress(src, tree, mark_near_far(tree), opts);
  Xorshift64Star rng(8);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.cnormal();
  const Vector got = hbs::apply(factors, v);
  for (Index i = 0; i < n; ++i) CHECK(std::abs(got[i] - A(i, i) * v[i]) <= 1e-14 * std::abs(A(i, i) * v[i]));
}

TEST_CASE("reconstruct guards the desk-scale limit") {
  HBSFactors f;
  f.N = 5000;
  CHECK_THROWS_AS(reconstruct(f), std::invalid_argument);
}

TEST_CASE("proxy and exact far-field compression agree") {
  const Instance inst = make_line_instance(512, KernelFamily::coulomb3d, 1.0, 32);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-9;
  opts.use_proxy = true;
  auto [f_proxy, s_proxy] = hbs_compress(src, inst.tree, inst.nf, opts);
  opts.use_proxy = false;
  auto [f_exact, s_exact] = hbs_compress(src, inst.tree, inst.nf, opts);
  const Matrix Rp = reconstruct(f_proxy);
  const Matrix Re = reconstruct(f_exact);
  const Matrix A = dense_of(inst);
  CHECK((Rp - A).norm() / A.norm() <= 10 * opts.tol);
  CHECK((Re - A).norm() / A.norm() <= 10 * opts.tol);
  CHECK((Rp - Re).norm() / A.norm() <= 10 * opts.tol);
}

TEST_CASE("proxy compression requires a kernel source") {
  const Index n = 64;
  PointCloud cloud = uniform_line(n);
  DenseSource src(Matrix::Identity(n, n), cloud);
  const SpatialTree tree = build_tree(cloud, 8);
  CompressOptions opts;
  opts.use_proxy = true;
  CHECK_THROWS_AS(hbs_compress(src, tree, mark_near_far(tree), opts), std::invalid_argument);
}

TEST_CASE("inconsistent tree and system dimensions are rejected") {
  const Instance inst = make_line_instance(128, KernelFamily::coulomb3d);
  const SpatialTree other = build_tree(uniform_line(64), 16);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  CHECK_THROWS_AS(hbs_compress(src, other, mark_near_far(other), opts), std::invalid_argument);
}

TEST_CASE("predict_counts evaluates the closed form") {
  // r=1, d=1, lambda=1, n1=1, N=2 -> 3*2 + 2*[(4-2+4)*1 + 4*3*1]/1 = 42
  CountParams p;
  p.d = 1;
  p.N = 2;
  p.M = 1;
  p.r = 1;
  p.n1 = 1;
  p.m = 64;
  const CountModel model = predict_counts(p, 1);
  CHECK(model.s_pred == 42.0);
  CHECK(model.t_model > 0);
}

TEST_CASE("predicted nonzeros bound the measured factors on random 1D instances") {
  Xorshift64Star rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 256 + static_cast<Index>(rng.uniform() * 512);
    Instance inst;
    inst.cloud = perturbed_line(n, 1000 + trial);
    inst.weights = RealVector::Constant(n, 1.0 / static_cast<double>(n));
    inst.tree = build_tree(inst.cloud, 32);
    inst.nf = mark_near_far(inst.tree);
    inst.spec.family = KernelFamily::coulomb3d;
    NystromSource src(inst.spec, inst.cloud, inst.weights);
    CompressOptions opts;
    opts.tol = 1e-8;
    auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);

    Index n1 = 0;
    for (const TreeBlock& b : inst.tree.level(0))
      n1 = std::max(n1, static_cast<Index>(b.indices.size()));
    CountParams p;
    p.d = 1;
    p.N = static_cast<double>(n);
    p.M = 32;
    p.r = static_cast<double>(std::max<Index>(stats.max_rank, 1));
    p.n1 = static_cast<double>(n1);
    p.m = 64;
    const CountModel model = predict_counts(p, inst.tree.num_levels());
    CHECK(static_cast<double>(stats.nnz_total) <= model.s_pred);
  }
}

TEST_CASE("predicted counts scale linearly in N") {
  CountParams p;
  p.d = 2;
  p.M = 64;
  p.r = 20;
  p.n1 = 64;
  p.m = 64;
  double prev_ratio = 0;
  for (Index n : {4096, 16384, 65536, 262144}) {
    p.N = static_cast<double>(n);
    const int lambda = static_cast<int>(std::floor(std::log2(p.N / p.M) / p.d)) + 1;
    const double s1 = predict_counts(p, lambda).s_pred;
    p.N = 2 * p.N;
    const int lambda2 = static_cast<int>(std::floor(std::log2(p.N / p.M) / p.d)) + 1;
    const double s2 = predict_counts(p, lambda2).s_pred;
    prev_ratio = s2 / s1;
    CHECK(prev_ratio <= 2.5);
    CHECK(prev_ratio >= 1.5);
  }
  CHECK(std::abs(prev_ratio - 2.0) <= 0.25);  // approaches 2 as N grows
}

TEST_CASE("factors serialize to a directory and load back bit-identically") {
  const Instance inst = make_line_instance(256, KernelFamily::coulomb3d, 1.0, 32);
  NystromSource src(inst.spec, inst.cloud, inst.weights);
  CompressOptions opts;
  opts.tol = 1e-9;
  auto [factors, stats] = hbs_compress(src, inst.tree, inst.nf, opts);
  factors.t = 0.5;

  const std::string dir = "factors_roundtrip";
  save_factors(factors, dir);
  const HBSFactors back = load_factors(dir);
  CHECK(back.N == factors.N);
  CHECK(back.depth == factors.depth);
  CHECK(back.dim == factors.dim);
  CHECK(back.t == factors.t);
  CHECK(back.perm == factors.perm);
  const Matrix a = reconstruct(factors);
  const Matrix b = reconstruct(back);
  CHECK(a == b);  // 17-digit round-trip is exact for doubles
  std::filesystem::remove_all(dir);
}
