#include "qbxfds/geometry.hpp"

#include <cmath>

#include "qbxfds/kernels.hpp"

namespace qbxfds {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ParametricShape ParametricShape::circle(double radius) {
  ParametricShape s;
  s.kind = ShapeKind::Circle;
  s.radius = radius;
  s.validate();
  return s;
}

ParametricShape ParametricShape::starfish(double amplitude, int arms) {
  ParametricShape s;
  s.kind = ShapeKind::Starfish;
  s.amplitude = amplitude;
  s.arms = arms;
  s.validate();
  return s;
}

ParametricShape ParametricShape::torus(double major_radius,
                                       double minor_radius) {
  ParametricShape s;
  s.kind = ShapeKind::Torus;
  s.major_radius = major_radius;
  s.minor_radius = minor_radius;
  s.validate();
  return s;
}

ParametricShape ParametricShape::sphere(double radius) {
  ParametricShape s;
  s.kind = ShapeKind::Sphere;
  s.radius = radius;
  s.validate();
  return s;
}

int ParametricShape::dim() const {
  return (kind == ShapeKind::Torus || kind == ShapeKind::Sphere) ? 3 : 2;
}

void ParametricShape::validate() const {
  switch (kind) {
    case ShapeKind::Circle:
    case ShapeKind::Sphere:
      if (radius <= 0) throw ParameterError("shape: radius must be positive");
      break;
    case ShapeKind::Starfish:
      if (!(std::abs(amplitude) < 1))
        throw ParameterError("starfish: |amplitude| < 1 keeps the curve simple");
      if (arms < 0) throw ParameterError("starfish: arm count must be >= 0");
      break;
    case ShapeKind::Torus:
      if (!(minor_radius > 0 && minor_radius < major_radius))
        throw ParameterError("torus: require 0 < minor radius < major radius");
      break;
  }
}

double ParametricShape::analytic_measure() const {
  switch (kind) {
    case ShapeKind::Circle:
      return 2 * kPi * radius;
    case ShapeKind::Sphere:
      return 4 * kPi * radius * radius;
    case ShapeKind::Torus:
      return 4 * kPi * kPi * major_radius * minor_radius;
    case ShapeKind::Starfish: {
      // numerical arc length; the curve has no closed form
      const int nq = 4096;
      const double m = arms + 1.0;
      double acc = 0;
      for (int i = 0; i < nq; ++i) {
        const double th = 2 * kPi * (i + 0.5) / nq;
        const double rho = 1 + amplitude * std::sin(m * th);
        const double drho = amplitude * m * std::cos(m * th);
        acc += std::sqrt(rho * rho + drho * drho);
      }
      return acc * 2 * kPi / nq;
    }
  }
  return 0;
}

double Discretization::panel_extent(long p) const {
  const Panel& pan = panels.at(p);
  if (dim == 2) {
    double arc = 0;
    for (long i = pan.begin; i < pan.end; ++i) arc += weights[i];
    return arc;
  }
  double d2 = 0;
  for (long i = pan.begin; i < pan.end; ++i)
    for (long j = i + 1; j < pan.end; ++j)
      d2 = std::max(d2, (nodes.row(i) - nodes.row(j)).squaredNorm());
  return std::sqrt(d2);
}

namespace {

// theta -> (point, dgamma/dtheta) for the 2D shapes
void curve_point(const ParametricShape& s, double th, double* x, double* dx) {
  if (s.kind == ShapeKind::Circle) {
    x[0] = s.radius * std::cos(th);
    x[1] = s.radius * std::sin(th);
    dx[0] = -s.radius * std::sin(th);
    dx[1] = s.radius * std::cos(th);
    return;
  }
  const double m = s.arms + 1.0;
  const double rho = 1 + s.amplitude * std::sin(m * th);
  const double drho = s.amplitude * m * std::cos(m * th);
  x[0] = rho * std::cos(th);
  x[1] = rho * std::sin(th);
  dx[0] = drho * std::cos(th) - rho * std::sin(th);
  dx[1] = drho * std::sin(th) + rho * std::cos(th);
}

Discretization build_curve(const ParametricShape& shape, long n_panels,
                           int q) {
  shape.validate();
  if (n_panels < 4) throw ParameterError("build_curve: need >= 4 panels");
  if (q < 2) throw ParameterError("build_curve: need >= 2 nodes per panel");
  VectorXd gx, gw;
  gauss_legendre(q, gx, gw);

  Discretization disc;
  disc.dim = 2;
  const long n = n_panels * q;
  disc.nodes.resize(n, 2);
  disc.weights.resize(n);
  disc.normals.resize(n, 2);
  disc.panels.resize(n_panels);
  disc.centroids.resize(n_panels, 2);

  const double h = 2 * kPi / n_panels;
  for (long p = 0; p < n_panels; ++p) {
    disc.panels[p] = Panel{p * q, (p + 1) * q};
    Eigen::Vector2d cen = Eigen::Vector2d::Zero();
    for (int j = 0; j < q; ++j) {
      const long i = p * q + j;
      const double th = (p + 0.5 * (1 + gx[j])) * h;
      double x[2], dx[2];
      curve_point(shape, th, x, dx);
      const double speed = std::hypot(dx[0], dx[1]);
      disc.nodes(i, 0) = x[0];
      disc.nodes(i, 1) = x[1];
      disc.weights[i] = gw[j] * 0.5 * h * speed;
      // counterclockwise parametrization: outward normal = (y', -x')/|g'|
      disc.normals(i, 0) = dx[1] / speed;
      disc.normals(i, 1) = -dx[0] / speed;
      cen += disc.nodes.row(i).transpose();
    }
    disc.centroids.row(p) = (cen / q).transpose();
  }
  return disc;
}

// (u, v) -> (point, outward normal * jacobian) for the 3D shapes;
// u, v in [0, 2 pi) x [0, 2 pi) for the torus, [0, 2 pi) x (0, pi) sphere.
void surface_point(const ParametricShape& s, double u, double v, double* x,
                   double* nscaled) {
  if (s.kind == ShapeKind::Torus) {
    const double a = s.major_radius, b = s.minor_radius;
    const double ct = std::cos(v), st = std::sin(v);
    const double cp = std::cos(u), sp = std::sin(u);
    const double ring = a + b * ct;
    x[0] = ring * cp;
    x[1] = ring * sp;
    x[2] = b * st;
    const double jac = b * ring;
    nscaled[0] = jac * ct * cp;
    nscaled[1] = jac * ct * sp;
    nscaled[2] = jac * st;
    return;
  }
  const double R = s.radius;
  const double ct = std::cos(v), st = std::sin(v);
  const double cp = std::cos(u), sp = std::sin(u);
  x[0] = R * st * cp;
  x[1] = R * st * sp;
  x[2] = R * ct;
  const double jac = R * R * st;
  nscaled[0] = jac * st * cp;
  nscaled[1] = jac * st * sp;
  nscaled[2] = jac * ct;
}

Discretization build_surface(const ParametricShape& shape, long n_u, long n_v,
                             int q) {
  shape.validate();
  if (n_u < 2 || n_v < 2)
    throw ParameterError("build_surface: need >= 2 panels per direction");
  if (q < 2) throw ParameterError("build_surface: need >= 2 nodes per side");
  VectorXd gx, gw;
  gauss_legendre(q, gx, gw);

  const bool torus = shape.kind == ShapeKind::Torus;
  const double u_span = 2 * kPi, v_span = torus ? 2 * kPi : kPi;
  const double hu = u_span / n_u, hv = v_span / n_v;

  Discretization disc;
  disc.dim = 3;
  const long n_panels = n_u * n_v;
  const long nloc = static_cast<long>(q) * q;
  const long n = n_panels * nloc;
  disc.nodes.resize(n, 3);
  disc.weights.resize(n);
  disc.normals.resize(n, 3);
  disc.panels.resize(n_panels);
  disc.centroids.resize(n_panels, 3);

  for (long pu = 0; pu < n_u; ++pu) {
    for (long pv = 0; pv < n_v; ++pv) {
      const long p = pu * n_v + pv;
      disc.panels[p] = Panel{p * nloc, (p + 1) * nloc};
      Vector3d cen = Vector3d::Zero();
      for (int ju = 0; ju < q; ++ju) {
        for (int jv = 0; jv < q; ++jv) {
          const long i = p * nloc + ju * q + jv;
          const double u = (pu + 0.5 * (1 + gx[ju])) * hu;
          const double v = (pv + 0.5 * (1 + gx[jv])) * hv;
          double x[3], ns[3];
          surface_point(shape, u, v, x, ns);
          const double jac = std::sqrt(ns[0] * ns[0] + ns[1] * ns[1] +
                                       ns[2] * ns[2]);
          for (int d = 0; d < 3; ++d) {
            disc.nodes(i, d) = x[d];
            disc.normals(i, d) = ns[d] / jac;
          }
          disc.weights[i] = gw[ju] * gw[jv] * 0.25 * hu * hv * jac;
          cen += disc.nodes.row(i).transpose();
        }
      }
      disc.centroids.row(p) = (cen / nloc).transpose();
    }
  }
  return disc;
}

}  // namespace

Discretization build_starfish(double amplitude, int arms, long n_panels,
                              int q) {
  return build_curve(ParametricShape::starfish(amplitude, arms), n_panels, q);
}

Discretization build_circle(double radius, long n_panels, int q) {
  return build_curve(ParametricShape::circle(radius), n_panels, q);
}

Discretization build_torus(double major_radius, double minor_radius, long n_u,
                           long n_v, int q) {
  return build_surface(ParametricShape::torus(major_radius, minor_radius),
                       n_u, n_v, q);
}

Discretization build_sphere(double radius, long n_u, long n_v, int q) {
  return build_surface(ParametricShape::sphere(radius), n_u, n_v, q);
}

Discretization build_shape(const ParametricShape& shape, long n_u, long n_v,
                           int q) {
  if (shape.dim() == 2) return build_curve(shape, n_u, q);
  return build_surface(shape, n_u, n_v, q);
}

Discretization attach_qbx_centers(const Discretization& disc, Side side,
                                  double scale, double inflate) {
  if (scale <= 0) throw ParameterError("attach_qbx_centers: scale > 0");
  Discretization out = disc;
  out.side = side;
  const long n = disc.size();
  const int dim = disc.dim;
  out.qbx_centers.resize(n, dim);
  out.qbx_radii.resize(n);
  const double sign = side == Side::Interior ? -1.0 : 1.0;

  const long np = static_cast<long>(disc.panels.size());
  std::vector<long> owner(n);
  for (long p = 0; p < np; ++p) {
    const double r = scale * disc.panel_extent(p);
    for (long i = disc.panels[p].begin; i < disc.panels[p].end; ++i) {
      out.qbx_radii[i] = r;
      out.qbx_centers.row(i) =
          disc.nodes.row(i) + sign * r * disc.normals.row(i);
      owner[i] = p;
    }
  }

  // Bounding balls of each panel's nodes.
  PointMatrix ball_center(np, dim);
  VectorXd ball_radius(np);
  for (long p = 0; p < np; ++p) {
    const Panel& pan = disc.panels[p];
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(dim);
    for (long i = pan.begin; i < pan.end; ++i) c += disc.nodes.row(i);
    c /= static_cast<double>(pan.size());
    double r2 = 0;
    for (long i = pan.begin; i < pan.end; ++i)
      r2 = std::max(r2, (disc.nodes.row(i) - c).squaredNorm());
    ball_center.row(p) = c;
    ball_radius[p] = std::sqrt(r2);
  }

  std::vector<char> bad(n, 0);
  parallel_for(n, [&](long i) {
    for (long p = 0; p < np; ++p) {
      if (p == owner[i]) continue;
      const double d2 =
          (out.qbx_centers.row(i) - ball_center.row(p)).squaredNorm();
      const double lim = inflate * ball_radius[p];
      if (d2 < lim * lim) {
        bad[i] = 1;
        return;
      }
    }
  });
  for (long i = 0; i < n; ++i) {
    if (bad[i])
      throw CollisionError(
          "qbx center " + std::to_string(i) +
          " collides with a neighboring panel; refine the discretization or "
          "shrink the qbx scale");
  }
  return out;
}

void export_discretization_csv(const Discretization& disc,
                               const std::string& path) {
  std::vector<std::string> cols = {"x", "y"};
  if (disc.dim == 3) cols.push_back("z");
  cols.push_back("weight");
  for (int d = 0; d < disc.dim; ++d) cols.push_back("n" + std::to_string(d));
  if (disc.has_qbx()) {
    for (int d = 0; d < disc.dim; ++d) cols.push_back("c" + std::to_string(d));
    cols.push_back("qbx_radius");
  }
  cols.push_back("panel");
  CsvWriter csv(path, {"discretization export", "n=" +
                       std::to_string(disc.size())}, cols);
  long panel = 0;
  for (long i = 0; i < disc.size(); ++i) {
    while (panel + 1 < static_cast<long>(disc.panels.size()) &&
           i >= disc.panels[panel].end)
      ++panel;
    std::vector<double> row;
    for (int d = 0; d < disc.dim; ++d) row.push_back(disc.nodes(i, d));
    row.push_back(disc.weights[i]);
    for (int d = 0; d < disc.dim; ++d) row.push_back(disc.normals(i, d));
    if (disc.has_qbx()) {
      for (int d = 0; d < disc.dim; ++d) row.push_back(disc.qbx_centers(i, d));
      row.push_back(disc.qbx_radii[i]);
    }
    row.push_back(static_cast<double>(panel));
    csv.row(row);
  }
}

}  // namespace qbxfds
