#include <doctest.h>

#include <cmath>
#include <random>

#include "qbxfds/expansion.hpp"
#include "qbxfds/geometry.hpp"
#include "qbxfds/kernels.hpp"

using namespace qbxfds;

namespace {
constexpr double kPi = 3.14159265358979323846;

std::mt19937_64 rng(0x9e3779b9);

Vector3d random_unit() {
  std::normal_distribution<double> g;
  Vector3d v(g(rng), g(rng), g(rng));
  return v.normalized();
}
}  // namespace

TEST_CASE("green function values") {
  Vector3d x(0.3, -0.2, 0.5), y = x + random_unit();
  CHECK(green3(x, y) == doctest::Approx(1 / (4 * kPi)).epsilon(1e-14));

  Vector2d a(0.1, 0.4);
  Vector2d b = a + Vector2d(1.0, 0.0);
  CHECK(green2(a, b) == doctest::Approx(0.0).epsilon(1e-15));
  Vector2d c = a + Vector2d(std::exp(1.0), 0.0);
  CHECK(green2(a, c) == doctest::Approx(-1 / (2 * kPi)).epsilon(1e-14));

  CHECK_THROWS_AS(green3(x, x), SingularEvalError);
}

TEST_CASE("double-layer kernel") {
  // points on a circle of radius R: constant -1/(4 pi R)
  const double R = 1.7;
  for (int i = 0; i < 5; ++i) {
    const double t1 = 2 * kPi * i / 5.0, t2 = t1 + 1.1;
    Vector2d x(R * std::cos(t1), R * std::sin(t1));
    Vector2d y(R * std::cos(t2), R * std::sin(t2));
    Vector2d ny = y / R;
    CHECK(dlp2(x, y, ny) == doctest::Approx(-1 / (4 * kPi * R)).epsilon(1e-13));
  }

  // 3D orthogonal normal
  Vector3d x(1, 0, 0), y(0, 0, 0), n(0, 0, 1);
  CHECK(dlp3(x, y, n) == doctest::Approx(0.0).epsilon(1e-15));

  // finite-difference oracle along n_y
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Vector3d a(u(rng), u(rng), u(rng));
    Vector3d b = a + 1.5 * random_unit();
    Vector3d nb = random_unit();
    const double h = 1e-6;
    const double fd =
        (green3(a, b + h * nb) - green3(a, b - h * nb)) / (2 * h);
    CHECK(dlp3(a, b, nb) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("legendre polynomials bounded") {
  for (int l = 0; l <= 50; ++l) {
    for (int i = 0; i <= 400; ++i) {
      const double t = -1 + 2.0 * i / 400;
      CHECK(std::abs(legendre(l, t)) <= 1 + 1e-12);
    }
  }
  CHECK(legendre(3, 0.5) == doctest::Approx(0.5 * (5 * 0.125 - 3 * 0.5)));
}

TEST_CASE("spherical harmonics: normalization and addition theorem") {
  CHECK(sph_harm(0, 0, Vector3d(0, 0, 1)).real() ==
        doctest::Approx(std::sqrt(1 / (4 * kPi))));
  CHECK_THROWS_AS(sph_harm(2, 3, Vector3d(0, 0, 1)), ParameterError);

  // sum_m Y_l^m(x) Y_l^{-m}(y) = (2l+1)/(4pi) P_l(x.y), and conj symmetry
  for (int trial = 0; trial < 10; ++trial) {
    const Vector3d xh = random_unit(), yh = random_unit();
    for (int l : {0, 1, 2, 5, 11, 20}) {
      Complex acc = 0;
      for (int m = -l; m <= l; ++m) {
        const Complex a = sph_harm(l, m, xh);
        const Complex b = sph_harm(l, -m, yh);
        CHECK(std::abs(b - std::conj(sph_harm(l, m, yh))) < 1e-14);
        acc += a * b;
      }
      const double expected =
          (2 * l + 1) / (4 * kPi) * legendre(l, xh.dot(yh));
      CHECK(std::abs(acc.imag()) < 1e-12);
      CHECK(acc.real() == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  // coincident directions
  const Vector3d d = random_unit();
  for (int l : {1, 4, 9}) {
    Complex acc = 0;
    for (int m = -l; m <= l; ++m) acc += sph_harm(l, m, d) * sph_harm(l, -m, d);
    CHECK(acc.real() == doctest::Approx((2 * l + 1) / (4 * kPi)).epsilon(1e-12));
  }
}

TEST_CASE("sphere rule: weights and exactness") {
  for (int p : {0, 3, 5, 10}) {
    const SphereRule rule = sphere_rule(p);
    CHECK(rule.points.rows() == (p + 1) * (2 * p + 1));
    CHECK(rule.weights.sum() == doctest::Approx(4 * kPi).epsilon(1e-13));
    CHECK(rule.weights.minCoeff() > 0);
    // all harmonics 1 <= l <= 2p integrate to zero
    for (int l = 1; l <= 2 * p; ++l) {
      for (int m = -l; m <= l; ++m) {
        Complex acc = 0;
        for (long k = 0; k < rule.points.rows(); ++k)
          acc += rule.weights[k] *
                 sph_harm(l, m, rule.points.row(k).transpose());
        CHECK(std::abs(acc) < 1e-11);
      }
    }
  }
  CHECK(sphere_rule_order_for_count(192) == 9);
  CHECK(sphere_rule_order_for_count(1) == 0);
}

TEST_CASE("sphere rule: orthonormality quadrature oracle") {
  const int p = 4;
  const SphereRule rule = sphere_rule(p);
  for (int l = 0; l <= p; ++l) {
    for (int l2 = 0; l2 <= p; ++l2) {
      for (int m = -l; m <= l; ++m) {
        for (int m2 = -l2; m2 <= l2; ++m2) {
          Complex acc = 0;
          for (long k = 0; k < rule.points.rows(); ++k) {
            const Vector3d d = rule.points.row(k).transpose();
            acc += rule.weights[k] * sph_harm(l, m, d) *
                   std::conj(sph_harm(l2, m2, d));
          }
          const double expected = (l == l2 && m == m2) ? 1.0 : 0.0;
          CHECK(std::abs(acc - expected) < 1e-11);
        }
      }
    }
  }
}

TEST_CASE("circle trapezoidal discrete orthogonality") {
  const int p = 6, q = 2 * p + 1;
  for (int k = 1; k <= 2 * p; ++k) {
    Complex acc = 0;
    for (int j = 0; j < q; ++j)
      acc += std::polar(1.0, 2 * kPi * k * j / q);
    CHECK(std::abs(acc) < 1e-12);
  }
}

TEST_CASE("poisson kernel: identity, decay, series") {
  const Vector3d c(0.2, -0.1, 0.4);
  const double R = 1.3;
  const SphereRule rule = sphere_rule(8);

  // boundary data g = 1 extends to g(x) = R/|x-c|
  for (double rx : {1.8, 2.5, 6.0}) {
    const Vector3d x = c + rx * random_unit();
    double acc = 0;
    for (long k = 0; k < rule.points.rows(); ++k) {
      const Vector3d pk = c + R * rule.points.row(k).transpose();
      acc += poisson_kernel(3, x.data(), pk.data(), c.data(), R) *
             rule.weights[k] * R * R;
    }
    CHECK(acc == doctest::Approx(R / rx).epsilon(1e-8));
  }

  // decay along a ray
  const Vector3d dir = random_unit();
  double prev = 1e300;
  for (double rx : {2.0, 8.0, 64.0, 512.0}) {
    const Vector3d x = c + rx * dir;
    const Vector3d pk = c + R * random_unit();
    const double v = poisson_kernel(3, x.data(), pk.data(), c.data(), R);
    CHECK(std::abs(v) < prev);
    prev = std::abs(v);
  }
  CHECK(prev < 1e-6);

  // truncated spherical-harmonic series at rx = 2R
  const Vector3d x = c + 2 * R * random_unit();
  const Vector3d pk = c + R * random_unit();
  const double rx = (x - c).norm();
  const double ct = (x - c).dot(pk - c) / (rx * R);
  double series = 0;
  for (int l = 0; l <= 40; ++l)
    series += (2 * l + 1) / (4 * kPi) * std::pow(R, l - 1) /
              std::pow(rx, l + 1) * legendre(l, ct);
  CHECK(series ==
        doctest::Approx(poisson_kernel(3, x.data(), pk.data(), c.data(), R))
            .epsilon(1e-10));

  CHECK_THROWS_AS(
      poisson_kernel(3, c.data(), pk.data(), c.data(), R), ParameterError);
}

TEST_CASE("truncated multipole expansion") {
  const Vector3d c(0.1, 0.2, -0.3);
  // degenerate source at the center is exact at any order
  const Vector3d x = c + 2.3 * random_unit();
  CHECK(truncated_multipole(3, x.data(), c.data(), c.data(), 0) ==
        doctest::Approx(green3(x, c)).epsilon(1e-14));

  // ratio 1/2 at order 10
  const Vector3d y = c + 1.0 * random_unit();
  const Vector3d x2 = c + 2.0 * random_unit();
  const double err =
      std::abs(truncated_multipole(3, x2.data(), y.data(), c.data(), 10) -
               green3(x2, y));
  CHECK(err <= 1 / (4 * kPi * (2.0 - 1.0)) * std::pow(0.5, 11) * (1 + 1e-12));

  // 2D series against the closed form
  Vector2d c2(0.4, -0.2), y2 = c2 + Vector2d(0.3, 0.1);
  Vector2d x2d = c2 + Vector2d(-1.2, 0.9);
  CHECK(truncated_multipole(2, x2d.data(), y2.data(), c2.data(), 40) ==
        doctest::Approx(green2(x2d, y2)).epsilon(1e-12));

  CHECK_THROWS_AS(
      truncated_multipole(3, y.data(), x2.data(), c.data(), 4),
      ParameterError);
}

TEST_CASE("multipole error bound on random configurations") {
  std::uniform_real_distribution<double> u(0, 1);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Vector3d c(u(rng), u(rng), u(rng));
    const double ry = 0.05 + 0.9 * u(rng);
    const double rx = ry * (1.05 + 4 * u(rng));
    const Vector3d y = c + ry * random_unit();
    const Vector3d x = c + rx * random_unit();
    const int p = static_cast<int>(u(rng) * 12);
    const double err =
        std::abs(truncated_multipole(3, x.data(), y.data(), c.data(), p) -
                 green3(x, y));
    const double bound =
        1 / (4 * kPi * (rx - ry)) * std::pow(ry / rx, p + 1);
    CHECK(err <= bound * (1 + 1e-10));
    ++checked;
  }
  CHECK(checked == 10000);
}

TEST_CASE("irregular solid harmonic gradient vs finite differences") {
  std::uniform_real_distribution<double> u(-1, 1);
  const int lmax = 6;
  for (int trial = 0; trial < 6; ++trial) {
    Vector3d r(u(rng), u(rng), u(rng));
    r += 2.0 * random_unit();  // keep away from origin
    std::vector<Complex> dx, dy, dz, plus, minus;
    irregular_solid_harmonics_gradient(lmax, r, dx, dy, dz);
    const double h = 1e-6;
    for (int axis = 0; axis < 3; ++axis) {
      Vector3d e = Vector3d::Zero();
      e[axis] = h;
      irregular_solid_harmonics(lmax, r + e, plus);
      irregular_solid_harmonics(lmax, r - e, minus);
      const auto& grad = axis == 0 ? dx : (axis == 1 ? dy : dz);
      for (long k = 0; k < sh_size(lmax); ++k) {
        const Complex fd = (plus[k] - minus[k]) / (2 * h);
        CHECK(std::abs(fd - grad[k]) < 2e-5 * (1 + std::abs(grad[k])));
      }
    }
  }
}

TEST_CASE("qbx expansion: point source convergence and trivials") {
  // single unit source at distance 4r from the center
  const double r = 0.25;
  const Vector2d center2(0.3, 0.4);
  const Vector2d src2 = center2 + 4 * r * Vector2d(0.6, 0.8);
  const Vector2d tgt2 = center2 + r * Vector2d(-0.8, 0.6);
  PointMatrix sp2(1, 2);
  sp2 << src2.x(), src2.y();
  PointMatrix sn2(1, 2);
  sn2 << 0.0, 0.0;
  VectorXd str(1);
  str << 1.0;

  double prev_err = 1e300;
  for (int p = 2; p <= 8; ++p) {
    const LocalExpansion exp = qbx_expand(
        sp2, sn2, str, Layer::Single, center2, r, p);
    const double val = qbx_eval(exp, tgt2);
    const double err = std::abs(val - green2(tgt2, src2));
    CHECK(err <= 2.0 * std::pow(0.25, p + 1));
    CHECK(err <= prev_err + 1e-15);
    prev_err = err;
  }

  // 3D point source
  const Vector3d center3(0.1, -0.2, 0.5);
  const Vector3d src3 = center3 + 4 * r * random_unit();
  const Vector3d tgt3 = center3 + r * random_unit();
  PointMatrix sp3(1, 3), sn3(1, 3);
  sp3 << src3.x(), src3.y(), src3.z();
  sn3 << 0, 0, 0;
  for (int p = 2; p <= 8; ++p) {
    const LocalExpansion exp = qbx_expand(
        sp3, sn3, str, Layer::Single, center3, r, p);
    const double err = std::abs(qbx_eval(exp, tgt3) - green3(tgt3, src3));
    CHECK(err <= 1.0 * std::pow(0.25, p + 1));
  }

  // zero density
  VectorXd zero = VectorXd::Zero(1);
  const LocalExpansion ez =
      qbx_expand(sp2, sn2, zero, Layer::Single, center2, r, 4);
  CHECK(qbx_eval(ez, tgt2) == 0.0);

  // source inside the ball is rejected
  PointMatrix close(1, 2);
  close << center2.x() + 0.5 * r, center2.y();
  CHECK_THROWS_AS(
      qbx_expand(close, sn2, str, Layer::Single, center2, r, 4),
      AccuracyError);
}

TEST_CASE("qbx expansion: constant density single layer on a circle") {
  // S[1] on a circle of radius R equals -R log R on the surface
  const double R = 2.0;
  const Discretization disc = build_circle(R, 64, 4);
  const long target = 10;
  const double r = 0.5 * disc.panel_extent(10 / 4);
  const Vector2d x = disc.nodes.row(target).transpose();
  const Vector2d n = disc.normals.row(target).transpose();
  const Vector2d center = x - r * n;

  const LocalExpansion exp = qbx_expand(disc.nodes, disc.normals,
                                        disc.weights, Layer::Single,
                                        center, r, 6);
  const double val = qbx_eval(exp, x);
  CHECK(val == doctest::Approx(-R * std::log(R)).epsilon(1e-6));
}

TEST_CASE("qbx expansion: interior Gauss identity for the double layer") {
  // D[1] interior limit is -1
  const Discretization disc = build_starfish(0.2, 4, 128, 4);
  for (long target : {0L, 37L, 200L}) {
    const double r = 0.5 * disc.panel_extent(target / 4);
    const Vector2d x = disc.nodes.row(target).transpose();
    const Vector2d n = disc.normals.row(target).transpose();
    const Vector2d center = x - r * n;
    const LocalExpansion exp = qbx_expand(disc.nodes, disc.normals,
                                          disc.weights, Layer::Double,
                                          center, r, 4);
    CHECK(qbx_eval(exp, x) == doctest::Approx(-1.0).epsilon(5e-4));
  }
}

TEST_CASE("local expansion at the center returns the l=0 term") {
  const Vector2d center(0.0, 0.0);
  PointMatrix sp(1, 2), sn(1, 2);
  sp << 2.0, 0.0;
  sn << 0, 0;
  VectorXd str(1);
  str << 3.0;
  const LocalExpansion exp =
      qbx_expand(sp, sn, str, Layer::Single, center, 0.5, 5);
  CHECK(qbx_eval(exp, center) ==
        doctest::Approx(exp.coeffs[0].real()).epsilon(1e-15));
}
