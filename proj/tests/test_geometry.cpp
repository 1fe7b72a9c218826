#include <doctest.h>

#include <fstream>
#include <cmath>

#include "qbxfds/geometry.hpp"

using namespace qbxfds;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("starfish with zero amplitude is the unit circle") {
  const Discretization disc = build_starfish(0.0, 16, 64, 4);
  CHECK(disc.size() == 256);
  CHECK(disc.weights.sum() == doctest::Approx(2 * kPi).epsilon(1e-10));
  for (long i = 0; i < disc.size(); ++i) {
    CHECK(disc.nodes.row(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(disc.normals.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    // outward for the convex circle
    CHECK(disc.nodes.row(i).dot(disc.normals.row(i)) > 0);
  }
}

TEST_CASE("paper-scale starfish has 10240 nodes") {
  const Discretization disc = build_starfish(0.25, 16, 2560, 4);
  CHECK(disc.size() == 10240);
  CHECK(static_cast<long>(disc.panels.size()) == 2560);
  // nodes lie exactly on the curve
  for (long i = 0; i < disc.size(); i += 777) {
    const double x = disc.nodes(i, 0), y = disc.nodes(i, 1);
    const double th = std::atan2(y, x);
    const double rho = std::hypot(x, y);
    // theta of the node equals the parameter angle for a radial curve
    const double expected = 1 + 0.25 * std::sin(17 * th);
    CHECK(rho == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("equal panel arc lengths on the circle") {
  const Discretization disc = build_circle(1.0, 8, 4);
  for (long p = 0; p < 8; ++p)
    CHECK(disc.panel_extent(p) == doctest::Approx(2 * kPi / 8).epsilon(1e-10));
}

TEST_CASE("panel partition covers each node once") {
  const Discretization disc = build_starfish(0.25, 16, 32, 5);
  long covered = 0;
  long prev_end = 0;
  for (const Panel& p : disc.panels) {
    CHECK(p.begin == prev_end);
    covered += p.size();
    prev_end = p.end;
  }
  CHECK(covered == disc.size());
}

TEST_CASE("torus area and dof counts") {
  const Discretization disc = build_torus(10.0, 2.0, 16, 8, 4);
  const double area = 4 * kPi * kPi * 10.0 * 2.0;
  CHECK(disc.weights.sum() == doctest::Approx(area).epsilon(1e-3));
  CHECK(disc.size() == 16 * 8 * 16);

  // paper-scale 24000 dof configuration
  const Discretization big = build_torus(10.0, 2.0, 50, 30, 4);
  CHECK(big.size() == 24000);

  CHECK_THROWS_AS(build_torus(2.0, 2.0, 8, 8, 4), ParameterError);
}

TEST_CASE("sphere area and outward normals") {
  const double R = 1.5;
  const Discretization disc = build_sphere(R, 12, 12, 4);
  CHECK(disc.weights.sum() ==
        doctest::Approx(4 * kPi * R * R).epsilon(1e-3));
  for (long i = 0; i < disc.size(); i += 101) {
    CHECK(disc.nodes.row(i).dot(disc.normals.row(i)) > 0);
    CHECK(disc.normals.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quadrature converges at order >= 2q") {
  // arc length of the starfish under panel refinement
  const ParametricShape shape = ParametricShape::starfish(0.25, 4);
  const double exact = shape.analytic_measure();
  const int q = 2;
  std::vector<double> errs;
  for (long panels : {16, 32, 64, 128}) {
    const Discretization d = build_shape(shape, panels, 0, q);
    errs.push_back(std::abs(d.weights.sum() - exact) / exact);
  }
  // least-squares slope of log error vs log h
  double slope_sum = 0;
  int cnt = 0;
  for (size_t i = 1; i < errs.size(); ++i) {
    if (errs[i] < 1e-15 || errs[i - 1] < 1e-15) continue;
    slope_sum += std::log2(errs[i - 1] / errs[i]);
    ++cnt;
  }
  REQUIRE(cnt > 0);
  CHECK(slope_sum / cnt >= 2 * q - 0.5);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(build_starfish(1.5, 4, 64, 4), ParameterError);
  CHECK_THROWS_AS(build_starfish(0.25, 4, 2, 4), ParameterError);
  CHECK_THROWS_AS(build_starfish(0.25, 4, 64, 1), ParameterError);
  CHECK_THROWS_AS(ParametricShape::circle(-1.0), ParameterError);
}

TEST_CASE("qbx centers: geometry and radius rule") {
  const Discretization base = build_circle(1.0, 64, 4);
  const double scale = 0.5;
  const Discretization disc = attach_qbx_centers(base, Side::Interior, scale);
  REQUIRE(disc.has_qbx());
  const double panel_arc = 2 * kPi / 64;
  for (long i = 0; i < disc.size(); ++i) {
    // r = scale * panel arc length, uniform per panel
    CHECK(disc.qbx_radii[i] ==
          doctest::Approx(scale * panel_arc).epsilon(1e-10));
    // interior centers sit at distance 1 - r from the origin
    CHECK(disc.qbx_centers.row(i).norm() ==
          doctest::Approx(1.0 - disc.qbx_radii[i]).epsilon(1e-12));
    // center-node distance equals the radius
    CHECK((disc.qbx_centers.row(i) - disc.nodes.row(i)).norm() ==
          doctest::Approx(disc.qbx_radii[i]).epsilon(1e-12));
  }

  const Discretization ext = attach_qbx_centers(base, Side::Exterior, scale);
  for (long i = 0; i < ext.size(); i += 17)
    CHECK(ext.qbx_centers.row(i).norm() ==
          doctest::Approx(1.0 + ext.qbx_radii[i]).epsilon(1e-12));
}

TEST_CASE("qbx collision check matches a brute-force oracle") {
  const Discretization base = build_starfish(0.25, 16, 512, 4);
  const double scale = 0.5, inflate = 1.05;
  const Discretization disc =
      attach_qbx_centers(base, Side::Interior, scale, inflate);

  // brute force: recompute panel balls and test all center/panel pairs
  const long np = static_cast<long>(base.panels.size());
  bool any_violation = false;
  for (long i = 0; i < disc.size() && !any_violation; ++i) {
    const long own = i / 4;
    for (long p = 0; p < np; ++p) {
      if (p == own) continue;
      Eigen::RowVector2d c = Eigen::RowVector2d::Zero();
      for (long j = base.panels[p].begin; j < base.panels[p].end; ++j)
        c += base.nodes.row(j);
      c /= static_cast<double>(base.panels[p].size());
      double rad = 0;
      for (long j = base.panels[p].begin; j < base.panels[p].end; ++j)
        rad = std::max(rad, (base.nodes.row(j) - c).norm());
      if ((disc.qbx_centers.row(i) - c).norm() < inflate * rad)
        any_violation = true;
    }
  }
  // attach succeeded, so the oracle must agree there is no violation
  CHECK(!any_violation);
}

TEST_CASE("qbx collision error on underresolved geometry") {
  // a huge expansion radius makes centers cross the domain
  const Discretization base = build_starfish(0.25, 16, 64, 4);
  CHECK_THROWS_AS(attach_qbx_centers(base, Side::Interior, 8.0),
                  CollisionError);
}

TEST_CASE("discretization csv export") {
  const Discretization disc = attach_qbx_centers(
      build_circle(1.0, 8, 3), Side::Interior, 0.5);
  const std::string path = "/tmp/qbxfds_disc_test.csv";
  export_discretization_csv(disc, path);
  std::ifstream f(path);
  REQUIRE(f.good());
  std::string line;
  long rows = 0;
  while (std::getline(f, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == disc.size() + 1);  // header + data
}
