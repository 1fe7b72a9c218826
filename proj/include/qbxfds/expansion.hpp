#pragma once

#include "qbxfds/kernels.hpp"

namespace qbxfds {

// QBX local expansion of a layer potential about an off-surface center.
// 2D coefficients are Taylor coefficients in u = z - z_c (complex plane);
// 3D coefficients multiply regular solid harmonics R_l^m(x - c).
// Either way the potential near the center is Re(sum coeffs . basis).
struct LocalExpansion {
  int dim = 2;
  int order = 4;
  Vector3d center = Vector3d::Zero();  // z-padded in 2D
  double radius = 0;
  std::vector<Complex> coeffs;  // 2D: order+1; 3D: (order+1)^2 packed (l,m)
};

// Relative slack when testing that a source sits outside the expansion ball.
inline constexpr double kQbxBallSlack = 1e-9;

// --- per-source moments ------------------------------------------------------
// A layer kernel splits as K(x, y) = Re(sum_k basis_k(x - c) moment_k(y - c)),
// valid while the source stays outside the expansion ball. Moments exclude
// quadrature weights and density.

// 2D, out has size p+1.
void qbx_moments2(Complex v, Complex source_normal, Layer layer, int p,
                  double radius, Complex* out);
// 2D basis u^l, out size p+1.
void qbx_basis2(Complex u, int p, Complex* out);

// 3D, out has size (p+1)^2; scratch holds solid-harmonic workspaces.
struct MomentScratch {
  std::vector<Complex> vals, dx, dy, dz;
};
void qbx_moments3(const Vector3d& v, const Vector3d& source_normal,
                  Layer layer, int p, double radius, MomentScratch& scratch,
                  Complex* out);
// 3D basis = regular solid harmonics, out size (p+1)^2.
void qbx_basis3(const Vector3d& u, int p, std::vector<Complex>& out);

inline double expansion_dot(const Complex* moments, const Complex* basis,
                            long n) {
  double acc = 0;
  for (long i = 0; i < n; ++i) {
    acc += moments[i].real() * basis[i].real() -
           moments[i].imag() * basis[i].imag();
  }
  return acc;
}

// Forms the expansion of sum_j strength_j K(., y_j) about the center.
// Sources strictly inside the expansion ball raise AccuracyError.
LocalExpansion qbx_expand(const PointMatrix& source_points,
                          const PointMatrix& source_normals,
                          const VectorXd& strengths, Layer layer,
                          const VectorXd& center, double radius, int order);

// Evaluates the expansion at x; |x - center| <= radius for accuracy claims.
double qbx_eval(const LocalExpansion& exp, const VectorXd& x);

}  // namespace qbxfds
