#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "hbs/geometry.hpp"
#include "hbs/rng.hpp"
#include "oracles.hpp"

using namespace hbs;

TEST_CASE("single point gives a depth-1 tree with one block") {
  PointCloud cloud;
  cloud.dim = 2;
  const double p[2] = {0.3, 0.4};
  cloud.append(p);
  const SpatialTree tree = build_tree(cloud, 64);
  CHECK(tree.num_levels() == 1);
  CHECK(tree.level(0).size() == 1);
  CHECK(tree.level(0)[0].indices.size() == 1);
}

TEST_CASE("empty cloud is rejected") {
  PointCloud cloud;
  cloud.dim = 1;
  CHECK_THROWS_AS(build_tree(cloud, 8), std::invalid_argument);
  PointCloud ok = uniform_line(4);
  CHECK_THROWS_AS(build_tree(ok, 0), std::invalid_argument);
}

TEST_CASE("depth formula holds on quasi-uniform clouds") {
  // lambda = floor(log2(N/M)/d) + 1
  const SpatialTree t1 = build_tree(uniform_line(8192), 64);
  CHECK(t1.num_levels() == 8);

  const SpatialTree t2 = build_tree(uniform_grid2d(16, 16), 16);
  CHECK(t2.num_levels() == 3);

  // quasi-uniform 3D volume samples: a jittered 16^3 grid
  PointCloud grid3;
  grid3.dim = 3;
  Xorshift64Star rng(17);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j)
      for (Index k = 0; k < 16; ++k) {
        const double p[3] = {(i + 0.5 + 0.3 * (rng.uniform() - 0.5)) / 16.0,
                             (j + 0.5 + 0.3 * (rng.uniform() - 0.5)) / 16.0,
                             (k + 0.5 + 0.3 * (rng.uniform() - 0.5)) / 16.0};
        grid3.append(p);
      }
  const SpatialTree t3 = build_tree(grid3, 64);
  const int expect = static_cast<int>(std::floor(std::log2(4096.0 / 64.0) / 3.0)) + 1;
  CHECK(t3.num_levels() == expect);
}

TEST_CASE("every level partitions the index set disjointly") {
  const PointCloud cloud = uniform_grid2d(16, 16);
  const SpatialTree tree = build_tree(cloud, 16);
  for (int l = 0; l < tree.num_levels(); ++l) {
    std::set<Index> seen;
    Index total = 0;
    for (const TreeBlock& b : tree.level(l)) {
      CHECK(static_cast<Index>(b.indices.size()) >= 1);
      for (Index i : b.indices) {
        CHECK(seen.insert(i).second);  // disjoint
        CHECK(b.box.contains(cloud.point(i)));
      }
      total += static_cast<Index>(b.indices.size());
    }
    CHECK(total == cloud.size());
  }
  // leaves satisfy the size bound
  for (const TreeBlock& b : tree.level(0)) CHECK(static_cast<Index>(b.indices.size()) <= 16);
}

TEST_CASE("children are contiguous and in parent order") {
  const SpatialTree tree = build_tree(ball_cloud(2000, 3), 32);
  for (int l = 1; l < tree.num_levels(); ++l) {
    int expect_begin = 0;
    for (const TreeBlock& b : tree.level(l)) {
      CHECK(b.child_begin == expect_begin);
      CHECK(b.child_end > b.child_begin);
      expect_begin = b.child_end;
    }
    CHECK(expect_begin == static_cast<int>(tree.level(l - 1).size()));
  }
}

TEST_CASE("single-block tree is NEAR to itself only") {
  PointCloud cloud = uniform_line(4);
  const SpatialTree tree = build_tree(cloud, 8);
  const NearFarLists nf = mark_near_far(tree);
  REQUIRE(tree.num_levels() == 1);
  CHECK(nf.near_of(0, 0) == std::vector<int>{0});
}

TEST_CASE("interior 1D block is NEAR to exactly 3 blocks") {
  const SpatialTree tree = build_tree(uniform_line(512), 64);
  const NearFarLists nf = mark_near_far(tree);
  const auto& finest = tree.level(0);
  REQUIRE(finest.size() == 8);
  for (std::size_t b = 1; b + 1 < finest.size(); ++b)
    CHECK(nf.near_of(0, static_cast<int>(b)).size() == 3);
  CHECK(nf.near_of(0, 0).size() == 2);  // boundary block: itself + one neighbor
}

TEST_CASE("interior 2D block on an 8x8 grid is NEAR to 9 blocks; oracle agrees") {
  const PointCloud cloud = uniform_grid2d(32, 32);  // 1024 points, 16 per box
  const SpatialTree tree = build_tree(cloud, 16);
  const NearFarLists nf = mark_near_far(tree);
  const auto& finest = tree.level(0);
  REQUIRE(finest.size() == 64);

  std::size_t nine = 0;
  for (std::size_t a = 0; a < finest.size(); ++a) {
    // brute-force box-touch oracle
    std::vector<int> expected;
    for (std::size_t b = 0; b < finest.size(); ++b)
      if (oracle::boxes_touch(finest[a].box, finest[b].box)) expected.push_back(static_cast<int>(b));
    CHECK(nf.near_of(0, static_cast<int>(a)) == expected);
    if (expected.size() == 9) ++nine;
  }
  CHECK(nine == 36);  // the 6x6 interior of an 8x8 arrangement
}

TEST_CASE("NEAR is reflexive and symmetric") {
  const SpatialTree tree = build_tree(ball_cloud(1500, 11), 48);
  const NearFarLists nf = mark_near_far(tree);
  for (int l = 0; l < tree.num_levels(); ++l) {
    const int nb = static_cast<int>(tree.level(l).size());
    for (int a = 0; a < nb; ++a) {
      CHECK(nf.is_near(l, a, a));
      for (int b = 0; b < nb; ++b) CHECK(nf.is_near(l, a, b) == nf.is_near(l, b, a));
    }
  }
}

TEST_CASE("proxy on the unit 2D box: m=4, factor 1.5") {
  BoundingBox box;
  box.dim = 2;
  box.lo = {0, 0, 0};
  box.hi = {1, 1, 0};
  const ProxySurface proxy = make_proxy(box, 4, 1.5);
  const double R = 1.5 * std::sqrt(2.0) / 2.0;
  CHECK(proxy.radius == doctest::Approx(R).epsilon(1e-15));
  REQUIRE(proxy.size() == 4);
  // points at angles k*pi/2 around the center
  for (Index k = 0; k < 4; ++k) {
    const double a = k * M_PI / 2.0;
    CHECK(proxy.points.point(k)[0] == doctest::Approx(0.5 + R * std::cos(a)));
    CHECK(proxy.points.point(k)[1] == doctest::Approx(0.5 + R * std::sin(a)));
  }
}

TEST_CASE("all proxy points lie strictly outside the box") {
  BoundingBox box;
  box.dim = 2;
  box.lo = {-0.25, 0.5, 0};
  box.hi = {0.75, 1.25, 0};
  const ProxySurface proxy = make_proxy(box, 64, 1.5);
  for (Index i = 0; i < proxy.size(); ++i) CHECK(!box.contains(proxy.points.point(i)));

  BoundingBox seg;
  seg.dim = 1;
  seg.lo = {0, 0, 0};
  seg.hi = {1, 0, 0};
  const ProxySurface p1 = make_proxy(seg, 9, 1.5);
  REQUIRE(p1.size() == 9);
  for (Index i = 0; i < p1.size(); ++i) CHECK(!seg.contains(p1.points.point(i)));
}

TEST_CASE("3D proxy points are pairwise distinct") {
  BoundingBox box;
  box.dim = 3;
  box.lo = {0, 0, 0};
  box.hi = {1, 1, 1};
  const ProxySurface proxy = make_proxy(box, 128, 1.5);
  REQUIRE(proxy.size() == 128);
  double min_spacing = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < proxy.size(); ++i)
    for (Index j = i + 1; j < proxy.size(); ++j)
      min_spacing = std::min(
          min_spacing, point_distance(proxy.points.point(i), proxy.points.point(j), 3));
  CHECK(min_spacing > 0);
  for (Index i = 0; i < proxy.size(); ++i) CHECK(!box.contains(proxy.points.point(i)));
}

TEST_CASE("proxy rejects radius_factor <= 1") {
  BoundingBox box;
  box.dim = 2;
  box.lo = {0, 0, 0};
  box.hi = {1, 1, 0};
  CHECK_THROWS_AS(make_proxy(box, 16, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_proxy(box, 0, 1.5), std::invalid_argument);
}

TEST_CASE("point cloud file round-trip") {
  const PointCloud cloud = ball_cloud(100, 5);
  save_cloud(cloud, "cloud_roundtrip.txt");
  const PointCloud back = load_cloud("cloud_roundtrip.txt");
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.dim == cloud.dim);
  for (Index i = 0; i < cloud.size(); ++i)
    for (int k = 0; k < cloud.dim; ++k) CHECK(back.point(i)[k] == cloud.point(i)[k]);
}
