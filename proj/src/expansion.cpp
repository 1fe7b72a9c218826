#include "qbxfds/expansion.hpp"

#include <cmath>

namespace qbxfds {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void qbx_moments2(Complex v, Complex source_normal, Layer layer, int p,
                  double radius, Complex* out) {
  const double rho = std::abs(v);
  if (rho < radius * (1.0 - kQbxBallSlack))
    throw AccuracyError("qbx: source inside the expansion ball");
  const Complex vinv = 1.0 / v;
  if (layer == Layer::Single) {
    // -log|z_x - z_y|/(2 pi) = -(log|v| - Re sum_l (u/v)^l / l)/(2 pi)
    out[0] = Complex(-std::log(rho) / (2 * kPi), 0.0);
    Complex pw = vinv;
    for (int l = 1; l <= p; ++l) {
      out[l] = pw / (2 * kPi * l);
      pw *= vinv;
    }
  } else {
    // n_y . grad_y G = -Re(n_c / (v - u)) / (2 pi),
    // 1/(v - u) = sum_l u^l / v^{l+1}
    Complex pw = vinv;
    for (int l = 0; l <= p; ++l) {
      out[l] = -source_normal * pw / (2 * kPi);
      pw *= vinv;
    }
  }
}

void qbx_basis2(Complex u, int p, Complex* out) {
  out[0] = 1.0;
  for (int l = 1; l <= p; ++l) out[l] = out[l - 1] * u;
}

void qbx_moments3(const Vector3d& v, const Vector3d& source_normal,
                  Layer layer, int p, double radius, MomentScratch& scratch,
                  Complex* out) {
  const double rho = v.norm();
  if (rho < radius * (1.0 - kQbxBallSlack))
    throw AccuracyError("qbx: source inside the expansion ball");
  const long n = sh_size(p);
  if (layer == Layer::Single) {
    irregular_solid_harmonics(p, v, scratch.vals);
    for (int l = 0; l <= p; ++l) {
      const double f = 1.0 / (2.0 * l + 1);
      for (int m = -l; m <= l; ++m) {
        const long k = sh_index(l, m);
        out[k] = f * std::conj(scratch.vals[k]);
      }
    }
  } else {
    irregular_solid_harmonics_gradient(p, v, scratch.dx, scratch.dy,
                                       scratch.dz);
    for (int l = 0; l <= p; ++l) {
      const double f = 1.0 / (2.0 * l + 1);
      for (int m = -l; m <= l; ++m) {
        const long k = sh_index(l, m);
        // conj first: moments carry I_l^{-m} = conj(I_l^m)
        const Complex g = source_normal.x() * std::conj(scratch.dx[k]) +
                          source_normal.y() * std::conj(scratch.dy[k]) +
                          source_normal.z() * std::conj(scratch.dz[k]);
        out[k] = f * g;
      }
    }
  }
  (void)n;
}

void qbx_basis3(const Vector3d& u, int p, std::vector<Complex>& out) {
  regular_solid_harmonics(p, u, out);
}

LocalExpansion qbx_expand(const PointMatrix& source_points,
                          const PointMatrix& source_normals,
                          const VectorXd& strengths, Layer layer,
                          const VectorXd& center, double radius, int order) {
  if (order < 0) throw ParameterError("qbx_expand: negative order");
  if (radius <= 0) throw ParameterError("qbx_expand: radius must be positive");
  const int dim = static_cast<int>(center.size());
  const long nsrc = source_points.rows();
  LocalExpansion exp;
  exp.dim = dim;
  exp.order = order;
  exp.radius = radius;
  exp.center.setZero();
  exp.center.head(dim) = center;

  if (dim == 2) {
    exp.coeffs.assign(order + 1, Complex(0, 0));
    std::vector<Complex> mom(order + 1);
    const Complex c(center[0], center[1]);
    for (long j = 0; j < nsrc; ++j) {
      const Complex v(source_points(j, 0) - c.real(),
                      source_points(j, 1) - c.imag());
      Complex nrm(0, 0);
      if (layer == Layer::Double)
        nrm = Complex(source_normals(j, 0), source_normals(j, 1));
      qbx_moments2(v, nrm, layer, order, radius, mom.data());
      for (int l = 0; l <= order; ++l) exp.coeffs[l] += strengths[j] * mom[l];
    }
  } else {
    exp.coeffs.assign(sh_size(order), Complex(0, 0));
    std::vector<Complex> mom(sh_size(order));
    MomentScratch scratch;
    for (long j = 0; j < nsrc; ++j) {
      const Vector3d v = source_points.row(j).transpose() - exp.center;
      Vector3d nrm = Vector3d::Zero();
      if (layer == Layer::Double) nrm = source_normals.row(j).transpose();
      qbx_moments3(v, nrm, layer, order, radius, scratch, mom.data());
      for (long k = 0; k < sh_size(order); ++k)
        exp.coeffs[k] += strengths[j] * mom[k];
    }
  }
  return exp;
}

double qbx_eval(const LocalExpansion& exp, const VectorXd& x) {
  if (exp.dim == 2) {
    const Complex u(x[0] - exp.center[0], x[1] - exp.center[1]);
    std::vector<Complex> basis(exp.order + 1);
    qbx_basis2(u, exp.order, basis.data());
    return expansion_dot(exp.coeffs.data(), basis.data(), exp.order + 1);
  }
  const Vector3d u = Vector3d(x[0], x[1], x[2]) - exp.center;
  std::vector<Complex> basis;
  qbx_basis3(u, exp.order, basis);
  return expansion_dot(exp.coeffs.data(), basis.data(), sh_size(exp.order));
}

}  // namespace qbxfds
