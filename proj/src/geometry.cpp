#include "hbs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hbs/rng.hpp"

namespace hbs {

void PointCloud::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("point cloud dimension must be 1, 2 or 3");
  if (coords.empty()) throw std::invalid_argument("point cloud is empty");
  if (coords.size() % dim != 0)
    throw std::invalid_argument("coordinate count is not a multiple of the dimension");
  for (double c : coords)
    if (!std::isfinite(c)) throw std::invalid_argument("point cloud has non-finite coordinates");
}

double squared_distance(const double* a, const double* b, int dim) {
  double s = 0;
  for (int k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double point_distance(const double* a, const double* b, int dim) {
  return std::sqrt(squared_distance(a, b, dim));
}

BoundingBox BoundingBox::of(const PointCloud& cloud, const std::vector<Index>& idx) {
  BoundingBox box;
  box.dim = cloud.dim;
  if (idx.empty()) return box;
  for (int k = 0; k < box.dim; ++k) box.lo[k] = box.hi[k] = cloud.point(idx[0])[k];
  for (Index i : idx) {
    const double* p = cloud.point(i);
    for (int k = 0; k < box.dim; ++k) {
      box.lo[k] = std::min(box.lo[k], p[k]);
      box.hi[k] = std::max(box.hi[k], p[k]);
    }
  }
  return box;
}

std::array<double, 3> BoundingBox::center() const {
  std::array<double, 3> c{{0, 0, 0}};
  for (int k = 0; k < dim; ++k) c[k] = 0.5 * (lo[k] + hi[k]);
  return c;
}

double BoundingBox::circumradius() const {
  double s = 0;
  for (int k = 0; k < dim; ++k) {
    const double h = 0.5 * (hi[k] - lo[k]);
    s += h * h;
  }
  return std::sqrt(s);
}

bool BoundingBox::contains(const double* p) const {
  for (int k = 0; k < dim; ++k)
    if (p[k] < lo[k] || p[k] > hi[k]) return false;
  return true;
}

bool BoundingBox::touches(const BoundingBox& other) const {
  for (int k = 0; k < dim; ++k)
    if (lo[k] > other.hi[k] || other.lo[k] > hi[k]) return false;
  return true;
}

namespace {

// Root box is expanded to a cube. With equal-size aligned boxes per level,
// every far-field point is at distance >= 3h from a block center while the
// default proxy radius is at most 1.5*sqrt(3)*h < 3h, so proxy surfaces
// always separate a block from its far field.
BoundingBox cubic_root_box(const PointCloud& cloud) {
  std::vector<Index> all(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) all[i] = i;
  BoundingBox tight = BoundingBox::of(cloud, all);
  double half = 0;
  for (int k = 0; k < tight.dim; ++k) half = std::max(half, 0.5 * (tight.hi[k] - tight.lo[k]));
  if (half == 0) half = 0.5;  // degenerate single-point cloud
  const auto c = tight.center();
  BoundingBox cube;
  cube.dim = tight.dim;
  for (int k = 0; k < cube.dim; ++k) {
    cube.lo[k] = c[k] - half;
    cube.hi[k] = c[k] + half;
  }
  return cube;
}

}  // namespace

SpatialTree build_tree(const PointCloud& cloud, Index leaf_size) {
  cloud.validate();
  if (leaf_size < 1) throw std::invalid_argument("leaf_size must be >= 1");

  SpatialTree tree;
  tree.dim = cloud.dim;
  tree.leaf_size = leaf_size;
  const int d = cloud.dim;

  // Build root-first; levels are reversed at the end so index 0 is finest.
  std::vector<std::vector<TreeBlock>> built(1);
  TreeBlock root;
  root.box = cubic_root_box(cloud);
  root.indices.resize(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) root.indices[i] = i;
  built[0].push_back(std::move(root));

  for (;;) {
    std::vector<TreeBlock>& cur = built.back();
    bool any_split = false;
    for (const TreeBlock& b : cur)
      if (static_cast<Index>(b.indices.size()) > leaf_size) any_split = true;
    if (!any_split) break;

    std::vector<TreeBlock> next;
    for (std::size_t bi = 0; bi < cur.size(); ++bi) {
      TreeBlock& b = cur[bi];
      b.child_begin = static_cast<int>(next.size());
      if (static_cast<Index>(b.indices.size()) <= leaf_size) {
        TreeBlock leaf;  // persists unchanged to the finer level
        leaf.box = b.box;
        leaf.indices = b.indices;
        leaf.parent = static_cast<int>(bi);
        next.push_back(std::move(leaf));
      } else {
        const auto c = b.box.center();
        const int nchild = 1 << d;
        std::vector<std::vector<Index>> parts(nchild);
        for (Index i : b.indices) {
          const double* p = cloud.point(i);
          int code = 0;
          for (int k = 0; k < d; ++k)
            if (p[k] >= c[k]) code |= 1 << k;
          parts[code].push_back(i);
        }
        for (int code = 0; code < nchild; ++code) {
          if (parts[code].empty()) continue;  // prune empty children
          TreeBlock child;
          child.box.dim = d;
          for (int k = 0; k < d; ++k) {
            child.box.lo[k] = (code & (1 << k)) ? c[k] : b.box.lo[k];
            child.box.hi[k] = (code & (1 << k)) ? b.box.hi[k] : c[k];
          }
          child.indices = std::move(parts[code]);
          child.parent = static_cast<int>(bi);
          next.push_back(std::move(child));
        }
      }
      b.child_end = static_cast<int>(next.size());
    }
    built.push_back(std::move(next));
  }

  tree.levels.assign(built.rbegin(), built.rend());
  return tree;
}

bool NearFarLists::is_near(int level, int a, int b) const {
  const auto& list = near.at(level).at(a);
  return std::binary_search(list.begin(), list.end(), b);
}

NearFarLists mark_near_far(const SpatialTree& tree) {
  NearFarLists nf;
  nf.near.resize(tree.num_levels());
  for (int l = 0; l < tree.num_levels(); ++l) {
    const auto& blocks = tree.level(l);
    const int nb = static_cast<int>(blocks.size());
    nf.near[l].resize(nb);
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b)
        if (blocks[a].box.touches(blocks[b].box)) nf.near[l][a].push_back(b);
  }
  return nf;
}

ProxySurface make_proxy(const BoundingBox& box, Index m, double radius_factor) {
  if (m < 1) throw std::invalid_argument("proxy point count must be >= 1");
  if (!(radius_factor > 1.0)) throw std::invalid_argument("proxy radius_factor must be > 1");

  ProxySurface proxy;
  proxy.center = box.center();
  proxy.radius = radius_factor * box.circumradius();
  proxy.points.dim = box.dim;
  const auto& c = proxy.center;
  const double R = proxy.radius;

  if (box.dim == 1) {
    // Two symmetric intervals [R, 2R] away from the center, equispaced.
    const Index per_side = (m + 1) / 2;
    for (Index side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? -1.0 : 1.0;
      const Index count = side == 0 ? per_side : m - per_side;
      for (Index k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        const double p = c[0] + sgn * (R + R * frac);
        proxy.points.append(&p);
      }
    }
  } else if (box.dim == 2) {
    for (Index k = 0; k < m; ++k) {
      const double a = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(m);
      const double p[2] = {c[0] + R * std::cos(a), c[1] + R * std::sin(a)};
      proxy.points.append(p);
    }
  } else {
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (Index k = 0; k < m; ++k) {
      const double z = m == 1 ? 0.0 : 1.0 - 2.0 * (k + 0.5) / static_cast<double>(m);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(k);
      const double p[3] = {c[0] + R * r * std::cos(a), c[1] + R * r * std::sin(a), c[2] + R * z};
      proxy.points.append(p);
    }
  }
  return proxy;
}

PointCloud uniform_line(Index n) {
  PointCloud cloud;
  cloud.dim = 1;
  cloud.coords.resize(n);
  for (Index i = 0; i < n; ++i) cloud.coords[i] = (i + 0.5) / static_cast<double>(n);
  return cloud;
}

PointCloud uniform_grid2d(Index nx, Index ny) {
  PointCloud cloud;
  cloud.dim = 2;
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i) {
      const double p[2] = {(i + 0.5) / static_cast<double>(nx), (j + 0.5) / static_cast<double>(ny)};
      cloud.append(p);
    }
  return cloud;
}

PointCloud ball_cloud(Index n, std::uint64_t seed) {
  PointCloud cloud;
  cloud.dim = 3;
  Xorshift64Star rng(seed);
  while (cloud.size() < n) {
    double p[3];
    for (int k = 0; k < 3; ++k) p[k] = rng.uniform(-1.0, 1.0);
    if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0) cloud.append(p);
  }
  return cloud;
}

PointCloud perturbed_line(Index n, std::uint64_t seed, double jitter) {
  PointCloud cloud = uniform_line(n);
  Xorshift64Star rng(seed);
  const double h = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) cloud.coords[i] += jitter * h * (rng.uniform() - 0.5);
  return cloud;
}

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open point cloud file: " + path);
  int dim = 0;
  Index n = 0;
  if (!(in >> dim >> n)) throw std::invalid_argument("bad point cloud header in " + path);
  PointCloud cloud;
  cloud.dim = dim;
  cloud.coords.resize(static_cast<std::size_t>(n) * dim);
  for (double& c : cloud.coords)
    if (!(in >> c)) throw std::invalid_argument("truncated point cloud file " + path);
  cloud.validate();
  return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write point cloud file: " + path);
  out << cloud.dim << ' ' << cloud.size() << '\n';
  out.precision(17);
  for (Index i = 0; i < cloud.size(); ++i) {
    const double* p = cloud.point(i);
    for (int k = 0; k < cloud.dim; ++k) out << (k ? " " : "") << p[k];
    out << '\n';
  }
}

}  // namespace hbs
