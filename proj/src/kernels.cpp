#include "qbxfds/kernels.hpp"

#include <cmath>

namespace qbxfds {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSingularTol = 1e-300;

double dist(int dim, const double* a, const double* b) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}
}  // namespace

double green(int dim, const double* x, const double* y) {
  const double r = dist(dim, x, y);
  if (r < kSingularTol)
    throw SingularEvalError("green: coincident evaluation points");
  return dim == 2 ? -std::log(r) / (2 * kPi) : 1 / (4 * kPi * r);
}

double dlp_kernel(int dim, const double* x, const double* y,
                  const double* ny) {
  double r2 = 0, dot = 0;
  for (int d = 0; d < dim; ++d) {
    const double diff = y[d] - x[d];
    r2 += diff * diff;
    dot += ny[d] * diff;
  }
  if (r2 < kSingularTol * kSingularTol)
    throw SingularEvalError("dlp_kernel: coincident evaluation points");
  // n_y . grad_y G = -n_y . (y - x) / (c_d r^d),  c_2 = 2 pi, c_3 = 4 pi
  if (dim == 2) return -dot / (2 * kPi * r2);
  return -dot / (4 * kPi * r2 * std::sqrt(r2));
}

double kernel_value(KernelKind kind, const double* x, const double* y,
                    const double* ny) {
  return kind.layer == Layer::Single ? green(kind.dim, x, y)
                                     : dlp_kernel(kind.dim, x, y, ny);
}

double legendre(int l, double t) {
  if (l < 0) throw ParameterError("legendre: negative degree");
  if (l == 0) return 1.0;
  double pm1 = 1.0, p = t;
  for (int k = 2; k <= l; ++k) {
    const double next = ((2 * k - 1) * t * p - (k - 1) * pm1) / k;
    pm1 = p;
    p = next;
  }
  return p;
}

void normalized_assoc_legendre(int lmax, double t, double s,
                               std::vector<double>& out) {
  if (lmax > kMaxHarmonicDegree)
    throw ParameterError("spherical harmonic degree above the supported cap");
  const long sz = static_cast<long>(lmax + 1) * (lmax + 2) / 2;
  out.resize(sz);
  auto at = [&out](int l, int m) -> double& {
    return out[static_cast<long>(l) * (l + 1) / 2 + m];
  };
  at(0, 0) = std::sqrt(1.0 / (4 * kPi));
  for (int m = 1; m <= lmax; ++m)
    at(m, m) = at(m - 1, m - 1) * s * std::sqrt((2.0 * m + 1) / (2.0 * m));
  for (int m = 0; m < lmax; ++m)
    at(m + 1, m) = t * std::sqrt(2.0 * m + 3) * at(m, m);
  for (int m = 0; m <= lmax; ++m) {
    for (int l = m + 2; l <= lmax; ++l) {
      const double al = std::sqrt((4.0 * l * l - 1) /
                                  (static_cast<double>(l) * l - m * m));
      const double alm1 =
          std::sqrt((4.0 * (l - 1) * (l - 1) - 1) /
                    (static_cast<double>(l - 1) * (l - 1) - m * m));
      at(l, m) = al * (t * at(l - 1, m) - at(l - 2, m) / alm1);
    }
  }
}

Complex sph_harm(int l, int m, const Vector3d& direction) {
  if (l < 0 || std::abs(m) > l)
    throw ParameterError("sph_harm: require |m| <= l, l >= 0");
  const Vector3d d = direction.normalized();
  const double t = d.z();
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  const double phi = std::atan2(d.y(), d.x());
  std::vector<double> tab;
  normalized_assoc_legendre(l, t, s, tab);
  const int ma = std::abs(m);
  const double plm = tab[static_cast<long>(l) * (l + 1) / 2 + ma];
  return plm * std::polar(1.0, m * phi);
}

void gauss_legendre(int n, VectorXd& nodes, VectorXd& weights) {
  if (n < 1) throw ParameterError("gauss_legendre: need at least one node");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double pm1 = 1.0, p = x;
      for (int k = 2; k <= n; ++k) {
        const double next = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
        pm1 = p;
        p = next;
      }
      dp = n * (x * p - pm1) / (x * x - 1);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one polishing step for the weight
    double pm1 = 1.0, p = x;
    for (int k = 2; k <= n; ++k) {
      const double next = ((2 * k - 1) * x * p - (k - 1) * pm1) / k;
      pm1 = p;
      p = next;
    }
    dp = n * (x * p - pm1) / (x * x - 1);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

SphereRule sphere_rule(int p) {
  if (p < 0) throw ParameterError("sphere_rule: negative order");
  if (2 * p > kMaxHarmonicDegree)
    throw ParameterError("sphere_rule: exactness degree above harmonic cap");
  const int nt = p + 1, nphi = 2 * p + 1;
  VectorXd gx, gw;
  gauss_legendre(nt, gx, gw);
  SphereRule rule;
  rule.exact_degree = 2 * p;
  rule.points.resize(static_cast<long>(nt) * nphi, 3);
  rule.weights.resize(static_cast<long>(nt) * nphi);
  long idx = 0;
  for (int i = 0; i < nt; ++i) {
    const double t = gx[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (int k = 0; k < nphi; ++k, ++idx) {
      const double phi = 2 * kPi * k / nphi;
      rule.points.row(idx) << s * std::cos(phi), s * std::sin(phi), t;
      rule.weights[idx] = gw[i] * 2 * kPi / nphi;
    }
  }
  return rule;
}

int sphere_rule_order_for_count(long q) {
  if (q < 1) throw ParameterError("sphere_rule_order_for_count: q >= 1");
  int p = 0;
  while (p + 1 <= kMaxHarmonicDegree / 2 &&
         static_cast<long>(p + 2) * (2 * p + 3) <= q)
    ++p;
  return p;
}

double poisson_kernel(int dim, const double* x, const double* p,
                      const double* c, double R) {
  if (R <= 0) throw ParameterError("poisson_kernel: radius must be positive");
  const double rx = dist(dim, x, c);
  if (rx <= R)
    throw ParameterError("poisson_kernel: evaluation point must be exterior");
  const double rxp = dist(dim, x, p);
  const double num = rx * rx - R * R;
  if (dim == 2) return num / (2 * kPi * R * rxp * rxp);
  return num / (4 * kPi * R * rxp * rxp * rxp);
}

double truncated_multipole(int dim, const double* x, const double* y,
                           const double* c, int p) {
  if (p < 0) throw ParameterError("truncated_multipole: negative order");
  const double rx = dist(dim, x, c), ry = dist(dim, y, c);
  if (ry >= rx)
    throw ParameterError("truncated_multipole: require |y-c| < |x-c|");
  if (dim == 2) {
    const Complex u(x[0] - c[0], x[1] - c[1]);
    const Complex v(y[0] - c[0], y[1] - c[1]);
    Complex sum = 0, ratio = v / u, pow = ratio;
    for (int l = 1; l <= p; ++l) {
      sum += pow / static_cast<double>(l);
      pow *= ratio;
    }
    return -(std::log(std::abs(u)) - sum.real()) / (2 * kPi);
  }
  double ct = 0;
  for (int d = 0; d < 3; ++d) ct += (x[d] - c[d]) * (y[d] - c[d]);
  ct /= rx * ry > 0 ? rx * ry : 1.0;
  ct = std::clamp(ct, -1.0, 1.0);
  // sum_l (r_y^l / r_x^{l+1}) P_l(ct) / (4 pi), on-the-fly P_l recurrence
  double pm1 = 1.0, pl = ct, sum = 1.0 / rx;
  double ratio = ry / rx, fac = ratio / rx;
  for (int l = 1; l <= p; ++l) {
    sum += fac * pl;
    fac *= ratio;
    const double next = ((2 * l + 1) * ct * pl - l * pm1) / (l + 1);
    pm1 = pl;
    pl = next;
  }
  return sum / (4 * kPi);
}

namespace {

// Shared setup for the solid-harmonic evaluations: normalized Legendre
// values and the phase factors e^{i m phi}. Buffers are thread_local so the
// per-source hot loops never allocate after warmup.
struct SphWork {
  std::vector<double> plm;
  std::vector<Complex> phase;  // e^{i m phi}, m = 0..lmax
  double rho = 0;

  void fill(int lmax, const Vector3d& r) {
    rho = r.norm();
    double t = 1.0, s = 0.0, phi = 0.0;
    if (rho > 0) {
      t = std::clamp(r.z() / rho, -1.0, 1.0);
      s = std::sqrt(std::max(0.0, 1.0 - t * t));
      phi = std::atan2(r.y(), r.x());
    }
    normalized_assoc_legendre(lmax, t, s, plm);
    phase.resize(lmax + 1);
    const Complex e = std::polar(1.0, phi);
    phase[0] = 1.0;
    for (int m = 1; m <= lmax; ++m) phase[m] = phase[m - 1] * e;
  }

  Complex y(int l, int m) const {
    const int ma = std::abs(m);
    const double v = plm[static_cast<long>(l) * (l + 1) / 2 + ma];
    return m >= 0 ? v * phase[ma] : v * std::conj(phase[ma]);
  }
};

thread_local SphWork tl_sph_work;
thread_local std::vector<Complex> tl_sph_up;

}  // namespace

void regular_solid_harmonics(int lmax, const Vector3d& r,
                             std::vector<Complex>& out) {
  out.assign(sh_size(lmax), Complex(0, 0));
  const double rho = r.norm();
  if (rho == 0) {
    out[0] = std::sqrt(1.0 / (4 * kPi));
    return;
  }
  SphWork& basis = tl_sph_work;
  basis.fill(lmax, r);
  double rl = 1.0;
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) out[sh_index(l, m)] = rl * basis.y(l, m);
    rl *= rho;
  }
}

void irregular_solid_harmonics(int lmax, const Vector3d& r,
                               std::vector<Complex>& out) {
  const double rho = r.norm();
  if (rho == 0)
    throw SingularEvalError("irregular solid harmonics at the origin");
  out.resize(sh_size(lmax));
  SphWork& basis = tl_sph_work;
  basis.fill(lmax, r);
  double rinv = 1.0 / rho;
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) out[sh_index(l, m)] = rinv * basis.y(l, m);
    rinv /= rho;
  }
}

void irregular_solid_harmonics_gradient(int lmax, const Vector3d& r,
                                        std::vector<Complex>& out_dx,
                                        std::vector<Complex>& out_dy,
                                        std::vector<Complex>& out_dz) {
  std::vector<Complex>& up = tl_sph_up;
  irregular_solid_harmonics(lmax + 1, r, up);
  out_dx.resize(sh_size(lmax));
  out_dy.resize(sh_size(lmax));
  out_dz.resize(sh_size(lmax));
  const Complex mihalf(0, -0.5);
  for (int l = 0; l <= lmax; ++l) {
    const double den = 2.0 * l + 3;
    for (int m = -l; m <= l; ++m) {
      const double az =
          std::sqrt((2.0 * l + 1) *
                    (static_cast<double>(l + 1) * (l + 1) - m * m) / den);
      // without the Condon-Shortley phase the ladder signs depend on the
      // sign of m (they are uniform only in the phased convention)
      const double sp = m >= 0 ? -1.0 : 1.0;
      const double sm = m > 0 ? 1.0 : -1.0;
      const double ap = sp * std::sqrt((2.0 * l + 1) * (l + m + 1.0) *
                                       (l + m + 2.0) / den);
      const double am = sm * std::sqrt((2.0 * l + 1) * (l - m + 1.0) *
                                       (l - m + 2.0) / den);
      const Complex raise = ap * up[sh_index(l + 1, m + 1)];
      const Complex lower = am * up[sh_index(l + 1, m - 1)];
      const long k = sh_index(l, m);
      out_dx[k] = 0.5 * (raise + lower);
      out_dy[k] = mihalf * (raise - lower);
      out_dz[k] = -az * up[sh_index(l + 1, m)];
    }
  }
}

}  // namespace qbxfds
