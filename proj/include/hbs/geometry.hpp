#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hbs/common.hpp"

namespace hbs {

/// A flat list of d-dimensional points, d in {1,2,3}.
struct PointCloud {
  int dim = 0;
  std::vector<double> coords;  // size() * dim, point-major

  Index size() const { return dim == 0 ? 0 : static_cast<Index>(coords.size()) / dim; }
  const double* point(Index i) const { return coords.data() + i * dim; }
  double* point(Index i) { return coords.data() + i * dim; }

  void append(const double* p) { coords.insert(coords.end(), p, p + dim); }
  void validate() const;  // throws std::invalid_argument on violation
};

double squared_distance(const double* a, const double* b, int dim);
double point_distance(const double* a, const double* b, int dim);

struct BoundingBox {
  int dim = 0;
  std::array<double, 3> lo{{0, 0, 0}};
  std::array<double, 3> hi{{0, 0, 0}};

  static BoundingBox of(const PointCloud& cloud, const std::vector<Index>& idx);

  std::array<double, 3> center() const;
  double circumradius() const;  // half diagonal
  bool contains(const double* p) const;
  // Closed boxes: touching along a face, edge or corner counts.
  bool touches(const BoundingBox& other) const;
};

struct TreeBlock {
  BoundingBox box;
  std::vector<Index> indices;  // global point ids
  int parent = -1;             // block index one level coarser
  int child_begin = 0;         // block range one level finer; a leaf that
  int child_end = 0;           // persists maps onto itself
};

// Hierarchical spatial partition built by midpoint bisection of a cubic root
// box (binary/quad/oct tree). Level 0 is the finest partition, level
// num_levels()-1 the root. Every level is a complete partition of the cloud:
// a box that stops subdividing early is carried down to the finer levels, so
// children of one block are always contiguous and in parent order.
struct SpatialTree {
  int dim = 0;
  Index leaf_size = 0;
  std::vector<std::vector<TreeBlock>> levels;  // [0] = finest

  int num_levels() const { return static_cast<int>(levels.size()); }
  const std::vector<TreeBlock>& level(int l) const { return levels.at(l); }
};

SpatialTree build_tree(const PointCloud& cloud, Index leaf_size);

// NEAR = closed bounding boxes intersect; FAR is the complement and is not
// materialized. Indexing matches SpatialTree levels (0 = finest).
struct NearFarLists {
  std::vector<std::vector<std::vector<int>>> near;  // near[level][block] sorted

  bool is_near(int level, int a, int b) const;
  const std::vector<int>& near_of(int level, int b) const { return near.at(level).at(b); }
};

NearFarLists mark_near_far(const SpatialTree& tree);

struct ProxySurface {
  PointCloud points;
  std::array<double, 3> center{{0, 0, 0}};
  double radius = 0;

  Index size() const { return points.size(); }
};

// m points on a circle (2D) / Fibonacci sphere (3D) of radius
// radius_factor * circumradius around the box center. In 1D the "surface" is
// two symmetric intervals of equispaced points outside the box.
ProxySurface make_proxy(const BoundingBox& box, Index m, double radius_factor);

// Cloud generators shared by tests and experiments.
PointCloud uniform_line(Index n);                      // [0,1]
PointCloud uniform_grid2d(Index nx, Index ny);         // [0,1]^2
PointCloud ball_cloud(Index n, std::uint64_t seed);    // quasi-uniform unit ball
PointCloud perturbed_line(Index n, std::uint64_t seed, double jitter = 0.25);

PointCloud load_cloud(const std::string& path);
void save_cloud(const PointCloud& cloud, const std::string& path);

}  // namespace hbs
