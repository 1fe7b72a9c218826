#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qbxfds/kernels.hpp"
#include "qbxfds/util.hpp"

namespace qbxfds {

enum class ShapeKind { Circle, Starfish, Torus, Sphere };

struct ParametricShape {
  ShapeKind kind = ShapeKind::Circle;
  double amplitude = 0.0;    // starfish arm amplitude, < 1
  int arms = 0;              // starfish arm count
  double major_radius = 0;   // torus
  double minor_radius = 0;   // torus
  double radius = 1.0;       // circle / sphere

  static ParametricShape circle(double radius);
  static ParametricShape starfish(double amplitude, int arms);
  static ParametricShape torus(double major_radius, double minor_radius);
  static ParametricShape sphere(double radius);

  int dim() const;
  void validate() const;
  // Exact circumference (2D) or surface area (3D).
  double analytic_measure() const;
};

enum class Side { Interior, Exterior };

struct Panel {
  long begin = 0;  // node index range [begin, end)
  long end = 0;
  long size() const { return end - begin; }
};

// Nystrom discretization: one shared source/target point set. Weights carry
// the arc-length or area element, normals point outward. QBX centers and
// radii are present once attach_qbx_centers has run.
struct Discretization {
  int dim = 2;
  PointMatrix nodes;    // n x dim
  VectorXd weights;     // n
  PointMatrix normals;  // n x dim, unit
  std::vector<Panel> panels;
  PointMatrix centroids;   // panels x dim
  PointMatrix qbx_centers; // n x dim (0 x dim before attach)
  VectorXd qbx_radii;    // n
  Side side = Side::Interior;

  long size() const { return nodes.rows(); }
  bool has_qbx() const { return qbx_centers.rows() == nodes.rows(); }
  // Size measure of panel p used by the QBX radius rule: arc length in 2D,
  // node-set diameter in 3D.
  double panel_extent(long p) const;
};

// 2D curve discretizations on equal parameter panels with q-node
// Gauss-Legendre per panel.
Discretization build_starfish(double amplitude, int arms, long n_panels,
                              int q);
Discretization build_circle(double radius, long n_panels, int q);

// 3D tensor-product panels: n_u x n_v quads, q x q Gauss-Legendre each.
Discretization build_torus(double major_radius, double minor_radius, long n_u,
                           long n_v, int q);
Discretization build_sphere(double radius, long n_u, long n_v, int q);

Discretization build_shape(const ParametricShape& shape, long n_u, long n_v,
                           int q);

// Attaches per-node expansion centers c = x -+ r n with r = scale * panel
// extent, then verifies no center falls inside another panel's bounding
// ball inflated by `inflate`. Throws CollisionError on violation.
Discretization attach_qbx_centers(const Discretization& disc, Side side,
                                  double scale, double inflate = 1.05);

void export_discretization_csv(const Discretization& disc,
                               const std::string& path);

}  // namespace qbxfds
