#include "hbs/kernels.hpp"

#include <cmath>

namespace hbs {

void KernelSpec::validate() const {
  if (!std::isfinite(kappa) || kappa < 0) throw std::invalid_argument("wavenumber must be finite and >= 0");
  if (family == KernelFamily::powerlaw && !(p > 0)) throw std::invalid_argument("powerlaw exponent must be > 0");
}

KernelFamily kernel_family_from_name(const std::string& name) {
  if (name == "log2d") return KernelFamily::log2d;
  if (name == "hankel2d") return KernelFamily::hankel2d;
  if (name == "coulomb3d") return KernelFamily::coulomb3d;
  if (name == "helmholtz3d") return KernelFamily::helmholtz3d;
  if (name == "powerlaw") return KernelFamily::powerlaw;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::log2d: return "log2d";
    case KernelFamily::hankel2d: return "hankel2d";
    case KernelFamily::coulomb3d: return "coulomb3d";
    case KernelFamily::helmholtz3d: return "helmholtz3d";
    case KernelFamily::powerlaw: return "powerlaw";
  }
  return "?";
}

namespace {
constexpr double kEulerGamma = 0.57721566490153286060651209;
}

Complex hankel0_first_kind(double z) {
  if (!(z > 0) || !std::isfinite(z))
    throw SingularEvaluationError("H0^(1) requires a positive finite argument");

  if (z <= 8.0) {
    // J0 by its ascending series; Y0 = (2/pi)[(ln(z/2)+gamma) J0 - sum H_k t_k]
    // with t_k = (-z^2/4)^k / (k!)^2 and H_k the harmonic numbers.
    const double q = 0.25 * z * z;
    double term = 1.0, j0 = 1.0, hsum = 0.0, ysum = 0.0;
    for (int k = 1; k <= 80; ++k) {
      term *= -q / (static_cast<double>(k) * k);
      j0 += term;
      hsum += 1.0 / k;
      ysum += term * hsum;
      if (std::abs(term) < 1e-20) break;
    }
    const double y0 = (2.0 / M_PI) * ((std::log(0.5 * z) + kEulerGamma) * j0 - ysum);
    return {j0, y0};
  }

  // H0^(1)(z) ~ sqrt(2/(pi z)) e^{i(z - pi/4)} sum_k i^k a_k / z^k with
  // a_k = (-1)^k ((2k-1)!!)^2 / (k! 8^k), truncated at the smallest term.
  Complex sum(1.0, 0.0);
  Complex term(1.0, 0.0);
  double prev_mag = 1.0;
  const Complex iz(0.0, 1.0 / z);
  for (int k = 1; k <= 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= iz * (-(odd * odd) / (8.0 * k));
    const double mag = std::abs(term);
    if (mag >= prev_mag) break;  // asymptotic series: stop at the smallest term
    sum += term;
    prev_mag = mag;
    if (mag < 1e-18) break;
  }
  const double amp = std::sqrt(2.0 / (M_PI * z));
  const double phase = z - 0.25 * M_PI;
  return amp * Complex(std::cos(phase), std::sin(phase)) * sum;
}

Complex eval_kernel(const KernelSpec& spec, const double* x, const double* y, int dim) {
  const double r2 = squared_distance(x, y, dim);
  if (r2 == 0.0) throw SingularEvaluationError("kernel evaluated at coincident points");
  const double r = std::sqrt(r2);
  switch (spec.family) {
    case KernelFamily::log2d:
      return {std::log(r), 0.0};
    case KernelFamily::hankel2d:
      return hankel0_first_kind(spec.kappa * r);
    case KernelFamily::coulomb3d:
      return {1.0 / r, 0.0};
    case KernelFamily::helmholtz3d: {
      const double kr = spec.kappa * r;
      return Complex(std::cos(kr), std::sin(kr)) / r;
    }
    case KernelFamily::powerlaw:
      return {std::pow(r, -spec.p), 0.0};
  }
  throw std::invalid_argument("unknown kernel family");
}

DenseSystem assemble_nystrom(const KernelSpec& spec, const PointCloud& cloud,
                             const RealVector& weights) {
  spec.validate();
  cloud.validate();
  const Index n = cloud.size();
  if (weights.size() != n) throw std::invalid_argument("weight count must match point count");
  for (Index j = 0; j < n; ++j)
    if (!(weights[j] > 0)) throw std::invalid_argument("quadrature weights must be positive");

  DenseSystem sys;
  sys.cloud = cloud;
  sys.weights = weights;
  sys.A.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    const double* xi = cloud.point(i);
    for (Index j = 0; j < n; ++j) {
      if (i == j) {
        sys.A(i, j) = 1.0;
        continue;
      }
      const double* xj = cloud.point(j);
      if (squared_distance(xi, xj, cloud.dim) == 0.0)
        throw SingularEvaluationError("duplicate points in cloud", i, j);
      sys.A(i, j) = weights[j] * eval_kernel(spec, xi, xj, cloud.dim);
    }
  }
  sys.b = default_rhs(spec, cloud);
  return sys;
}

Vector default_rhs(const KernelSpec& spec, const PointCloud& cloud) {
  // Field of a point source placed well outside the cloud; verifiable
  // Dirichlet data for interior problems.
  std::vector<Index> all(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) all[i] = i;
  const BoundingBox box = BoundingBox::of(cloud, all);
  const auto c = box.center();
  const double R = std::max(box.circumradius(), 0.5);
  const double dir[3] = {0.83867056794542402, 0.54463903501502708, 0.0};
  double src[3] = {0, 0, 0};
  for (int k = 0; k < cloud.dim; ++k) src[k] = c[k] + 2.5 * R * (cloud.dim == 1 ? 1.0 : dir[k]);

  Vector b(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i)
    b[i] = eval_kernel(spec, cloud.point(i), src, cloud.dim);
  return b;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("quadrature order must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
  }
}

namespace {

void starfish_point(double theta, int arms, double amp, double* xy, double* ds) {
  const double r = 1.0 + amp * std::cos(arms * theta);
  const double dr = -amp * arms * std::sin(arms * theta);
  xy[0] = r * std::cos(theta);
  xy[1] = r * std::sin(theta);
  *ds = std::sqrt(r * r + dr * dr);
}

}  // namespace

std::pair<PointCloud, RealVector> starfish_boundary(Index n_panels, Index nodes_per_panel,
                                                    int arms, double amp) {
  if (n_panels < 1 || nodes_per_panel < 1)
    throw std::invalid_argument("starfish_boundary needs at least one panel and node");
  std::vector<double> gn, gw;
  gauss_legendre(static_cast<int>(nodes_per_panel), gn, gw);

  PointCloud cloud;
  cloud.dim = 2;
  RealVector weights(n_panels * nodes_per_panel);
  const double dtheta = 2.0 * M_PI / static_cast<double>(n_panels);
  Index idx = 0;
  for (Index p = 0; p < n_panels; ++p) {
    const double a = p * dtheta;
    for (Index q = 0; q < nodes_per_panel; ++q, ++idx) {
      const double theta = a + 0.5 * dtheta * (1.0 + gn[q]);
      double xy[2], ds;
      starfish_point(theta, arms, amp, xy, &ds);
      cloud.append(xy);
      weights[idx] = 0.5 * dtheta * gw[q] * ds;
    }
  }
  return {std::move(cloud), std::move(weights)};
}

std::pair<PointCloud, RealVector> starfish_equispaced(Index n, int arms, double amp) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  PointCloud cloud;
  cloud.dim = 2;
  RealVector weights(n);
  const double dtheta = 2.0 * M_PI / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const double theta = i * dtheta;
    double xy[2], ds;
    starfish_point(theta, arms, amp, xy, &ds);
    cloud.append(xy);
    weights[i] = dtheta * ds;
  }
  return {std::move(cloud), std::move(weights)};
}

std::pair<PointCloud, RealVector> sphere_surface(Index n, double radius) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  PointCloud cloud;
  cloud.dim = 3;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (Index k = 0; k < n; ++k) {
    const double z = n == 1 ? 0.0 : 1.0 - 2.0 * (k + 0.5) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * static_cast<double>(k);
    const double p[3] = {radius * r * std::cos(a), radius * r * std::sin(a), radius * z};
    cloud.append(p);
  }
  RealVector weights = RealVector::Constant(n, 4.0 * M_PI * radius * radius / static_cast<double>(n));
  return {std::move(cloud), std::move(weights)};
}

std::pair<PointCloud, RealVector> line_rule(Index n) {
  PointCloud cloud = uniform_line(n);
  RealVector weights = RealVector::Constant(n, 1.0 / static_cast<double>(n));
  return {std::move(cloud), std::move(weights)};
}

}  // namespace hbs
