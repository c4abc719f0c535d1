#pragma once

#include <utility>
#include <vector>

#include "hbs/common.hpp"
#include "hbs/geometry.hpp"

namespace hbs {

enum class KernelFamily { log2d, hankel2d, coulomb3d, helmholtz3d, powerlaw };

struct KernelSpec {
  KernelFamily family = KernelFamily::log2d;
  double kappa = 0.0;  // wavenumber (wave families)
  double p = 1.0;      // exponent (powerlaw)

  void validate() const;
  bool is_wave() const {
    return family == KernelFamily::hankel2d || family == KernelFamily::helmholtz3d;
  }
};

KernelFamily kernel_family_from_name(const std::string& name);
std::string kernel_family_name(KernelFamily family);

/// K(x,y) per family: log|x-y|, H0^(1)(kappa|x-y|), 1/|x-y|,
/// e^{i kappa|x-y|}/|x-y|, |x-y|^{-p}. Throws SingularEvaluationError at x==y.
Complex eval_kernel(const KernelSpec& spec, const double* x, const double* y, int dim);

struct DenseSystem {
  Matrix A;
  Vector b;
  PointCloud cloud;
  RealVector weights;
};

// Nystrom discretization of a second-kind system: A_ii = 1,
// A_ij = w_j K(x_i, x_j). The right-hand side is the trace of an exterior
// point source (see default_rhs).
DenseSystem assemble_nystrom(const KernelSpec& spec, const PointCloud& cloud,
                             const RealVector& weights);

Vector default_rhs(const KernelSpec& spec, const PointCloud& cloud);

// Starfish r(theta) = 1 + amp*cos(arms*theta) sampled at composite
// Gauss-Legendre nodes; weights carry the arclength Jacobian.
std::pair<PointCloud, RealVector> starfish_boundary(Index n_panels, Index nodes_per_panel,
                                                    int arms = 5, double amp = 0.3);
std::pair<PointCloud, RealVector> starfish_equispaced(Index n, int arms = 5, double amp = 0.3);
// Fibonacci sphere surface with uniform weights 4 pi r^2 / n.
std::pair<PointCloud, RealVector> sphere_surface(Index n, double radius = 1.0);
// Uniform points on [0,1] with weights 1/n.
std::pair<PointCloud, RealVector> line_rule(Index n);

/// First-kind Hankel function H0^(1)(z) = J0(z) + i Y0(z) for z > 0.
/// Ascending series for z <= 8, Hankel's asymptotic expansion beyond.
Complex hankel0_first_kind(double z);

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace hbs
