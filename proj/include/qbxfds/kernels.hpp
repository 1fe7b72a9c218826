#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qbxfds/util.hpp"

namespace qbxfds {

using Complex = std::complex<double>;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

// Point sets are stored one point per row; row-major keeps each point
// contiguous so rows can be handed to the kernel evaluators as pointers.
using PointMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Layer { Single, Double };

struct KernelKind {
  int dim = 2;  // 2 or 3
  Layer layer = Layer::Single;
};

// Hard cap on spherical-harmonic degree; the normalized recurrences are
// stable well past this but nothing in the solver needs more.
inline constexpr int kMaxHarmonicDegree = 64;

// Free-space Laplace Green function, Eq. dispatch on dimension:
//   2D: -log(|x-y|)/(2*pi),  3D: 1/(4*pi*|x-y|).
double green(int dim, const double* x, const double* y);
inline double green2(const Vector2d& x, const Vector2d& y) {
  return green(2, x.data(), y.data());
}
inline double green3(const Vector3d& x, const Vector3d& y) {
  return green(3, x.data(), y.data());
}

// Double-layer kernel n_y . grad_y G(x, y).
double dlp_kernel(int dim, const double* x, const double* y, const double* ny);
inline double dlp2(const Vector2d& x, const Vector2d& y, const Vector2d& ny) {
  return dlp_kernel(2, x.data(), y.data(), ny.data());
}
inline double dlp3(const Vector3d& x, const Vector3d& y, const Vector3d& ny) {
  return dlp_kernel(3, x.data(), y.data(), ny.data());
}

double kernel_value(KernelKind kind, const double* x, const double* y,
                    const double* ny);

// Legendre polynomial P_l(t), |t| <= 1.
double legendre(int l, double t);

// Orthonormal complex spherical harmonic Y_l^m without the Condon-Shortley
// phase, so Y_l^{-m} = conj(Y_l^m) and the addition theorem reads
//   sum_m Y_l^m(xh) Y_l^{-m}(yh) = (2l+1)/(4 pi) P_l(xh . yh).
Complex sph_harm(int l, int m, const Vector3d& direction);

// Normalized associated Legendre values  \bar P_l^m = sqrt((2l+1)/(4 pi)
// (l-m)!/(l+m)!) P_l^m(t)  for all 0 <= m <= l <= lmax, packed row-wise
// (index l*(l+1)/2 + m). t = cos(theta), s = sin(theta) >= 0.
void normalized_assoc_legendre(int lmax, double t, double s,
                               std::vector<double>& out);

// Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, VectorXd& nodes, VectorXd& weights);

// Quadrature on the unit sphere exact for spherical harmonics of degree
// <= 2p: (p+1)-node Gauss-Legendre in cos(theta) x (2p+1)-node trapezoidal
// in phi, q = (p+1)(2p+1) points.
struct SphereRule {
  PointMatrix points;  // q x 3, unit vectors
  VectorXd weights;  // positive, sum = 4 pi
  int exact_degree;  // = 2p
};
SphereRule sphere_rule(int p);

// Largest order p whose product rule uses at most q points.
int sphere_rule_order_for_count(long q);

// Poisson kernel for the exterior Dirichlet problem on the sphere/circle of
// radius R centered at c:
//   3D: (|x-c|^2 - R^2) / (4 pi R |x-p|^3)
//   2D: (|x-c|^2 - R^2) / (2 pi R |x-p|^2)
// with the sign that reproduces exterior harmonics through the Poisson
// integral. Requires |x-c| > R.
double poisson_kernel(int dim, const double* x, const double* p,
                      const double* c, double R);

// Multipole expansion of the Green function about c, truncated at degree p.
// Requires |y-c| < |x-c|.
double truncated_multipole(int dim, const double* x, const double* y,
                           const double* c, int p);

// --- solid harmonics (3D expansion machinery) -------------------------------

inline long sh_index(int l, int m) { return static_cast<long>(l) * l + l + m; }
inline long sh_size(int lmax) {
  return static_cast<long>(lmax + 1) * (lmax + 1);
}

// Regular solid harmonics R_l^m(r) = rho^l Y_l^m(rhat) for l <= lmax.
void regular_solid_harmonics(int lmax, const Vector3d& r,
                             std::vector<Complex>& out);

// Irregular solid harmonics I_l^m(r) = Y_l^m(rhat) / rho^{l+1}.
void irregular_solid_harmonics(int lmax, const Vector3d& r,
                               std::vector<Complex>& out);

// Cartesian gradient of every I_l^m for l <= lmax, from the degree-raising
// identities
//   dz I_l^m        = -sqrt((2l+1)((l+1)^2-m^2)/(2l+3))        I_{l+1}^m
//   (dx+i dy) I_l^m = -sqrt((2l+1)(l+m+1)(l+m+2)/(2l+3))       I_{l+1}^{m+1}
//   (dx-i dy) I_l^m = -sqrt((2l+1)(l-m+1)(l-m+2)/(2l+3))       I_{l+1}^{m-1}
// out_* are packed like the value arrays up to lmax.
void irregular_solid_harmonics_gradient(int lmax, const Vector3d& r,
                                        std::vector<Complex>& out_dx,
                                        std::vector<Complex>& out_dy,
                                        std::vector<Complex>& out_dz);

}  // namespace qbxfds
