#pragma once

#include <Eigen/LU>

#include "qbxfds/error_model.hpp"
#include "qbxfds/solver_types.hpp"

namespace qbxfds {

struct CompressOptions {
  double alpha = 1.15;
  double tol = 1e-8;
  long proxy_count = 64;     // fixed q; ignored when auto_proxy
  bool auto_proxy = false;   // q per level from the error model
  ModelConstants constants;  // feeds the auto mode
  bool use_proxy_weight = true;
};

// Single-level compression A ~ D + L S R over the leaf clusters.
SingleLevelFactor compress_single_level(const OperatorSpec& spec,
                                        const Discretization& disc,
                                        const ClusterTree& tree,
                                        const CompressOptions& opts);

VectorXd solve_single_level(const SingleLevelFactor& factor,
                            const VectorXd& b);

// Dense reconstruction of the compressed operator (diagnostics / oracles).
MatrixXd reconstruct_single_level(const SingleLevelFactor& factor);

// Recursive compression of the telescoping factorization.
MultiLevelFactor compress_multilevel(const OperatorSpec& spec,
                                     const Discretization& disc,
                                     const ClusterTree& tree,
                                     const CompressOptions& opts);

VectorXd solve_multilevel(const MultiLevelFactor& factor, const VectorXd& b);

// Forward apply b = A_eps sigma through the telescoping factorization.
VectorXd apply_multilevel(const MultiLevelFactor& factor,
                          const VectorXd& sigma);

void factor_stats_csv(const MultiLevelFactor& factor, const std::string& path,
                      const std::vector<std::string>& metadata);

}  // namespace qbxfds
