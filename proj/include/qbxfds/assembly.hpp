#pragma once

#include "qbxfds/expansion.hpp"
#include "qbxfds/geometry.hpp"

namespace qbxfds {

// Operator a*I + K with the principal-value convention: the QBX one-sided
// limit is corrected by the jump term so that `identity_coeff` carries the
// textbook scaling factor (0 single layer, -1/2 interior / +1/2 exterior
// Dirichlet double layer).
struct OperatorSpec {
  KernelKind kernel;
  double identity_coeff = 0;
  int qbx_order = 4;
  Side side = Side::Interior;
  // Global QBX: expansions mediate every interaction. When false, sources
  // beyond far_threshold * qbx_radius use the plain kernel.
  bool qbx_everywhere = true;
  double far_threshold = 8.0;

  // +-1/2 correction turning the one-sided limit into the principal value.
  double jump_coeff() const {
    if (kernel.layer != Layer::Double) return 0.0;
    return side == Side::Interior ? 0.5 : -0.5;
  }
  // total coefficient added on self entries
  double diagonal_shift() const { return identity_coeff + jump_coeff(); }

  static OperatorSpec interior_dirichlet_double(int dim, int qbx_order = 4);
  static OperatorSpec first_kind_single(int dim, int qbx_order = 4);
};

struct DenseBlock {
  IndexList rows, cols;  // original node indices
  MatrixXd values;
};

// One row of QBX-mediated kernel values (no quadrature weights): the local
// expansion at the target's center, evaluated back at the target, resolved
// per source so that blocks concatenate exactly.
void qbx_kernel_values(const Discretization& disc, const OperatorSpec& spec,
                       Layer layer, long target,
                       const Eigen::Ref<const PointMatrix>& src_points,
                       const Eigen::Ref<const PointMatrix>& src_normals,
                       double* out);

// Plain kernel values from an off-surface target point.
void plain_kernel_values(KernelKind kind, const double* x,
                         const Eigen::Ref<const PointMatrix>& src_points,
                         const Eigen::Ref<const PointMatrix>& src_normals,
                         double* out);

// A(rows, cols) = K_qbx(X, Y) W(Y) + diagonal_shift on self entries.
DenseBlock assemble_block(const OperatorSpec& spec, const Discretization& disc,
                          const IndexList& rows, const IndexList& cols);

MatrixXd assemble_dense(const OperatorSpec& spec, const Discretization& disc);

// b = A sigma by direct point-to-point QBX evaluation, no compression.
VectorXd apply_dense(const OperatorSpec& spec, const Discretization& disc,
                     const VectorXd& sigma);

// Off-surface potential sum_j K(x, y_j) w_j sigma_j at arbitrary targets.
VectorXd evaluate_potential(KernelKind kind, const Discretization& disc,
                            const VectorXd& sigma, const PointMatrix& targets);

// Flat binary export: uint64 rows, uint64 cols, row-major doubles.
void write_dense_binary(const MatrixXd& M, const std::string& path);
MatrixXd read_dense_binary(const std::string& path);

}  // namespace qbxfds
