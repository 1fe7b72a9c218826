#pragma once

#include <Eigen/LU>

#include "qbxfds/skeleton.hpp"

namespace qbxfds {

// One cluster at one solver level. Row ids index targets, col ids sources;
// at the leaf level the two coincide, above they are the children's retained
// row/col skeletons (same child order on both sides, equal rank per child).
struct FactorCluster {
  long box = -1;
  IndexList row_ids, col_ids;
  IndexList row_skel, col_skel;  // retained original node ids
  MatrixXd L;                    // n_r x k
  MatrixXd R;                    // k x n_c
  MatrixXd D;                    // apply-diagonal; child-diag zeroed for l>0
  Eigen::PartialPivLU<MatrixXd> D_eff;  // D + blkdiag(child Dhat), factored
  MatrixXd Dhat;                 // (R D_eff^{-1} L)^{-1}
  IndexList children;            // cluster indices one level below
  IndexList child_offsets;       // k-prefix offsets of the children
  // diagnostics for the error model
  double proxy_radius_tgt = 0, proxy_radius_src = 0;
  long near_size_tgt = 0, near_size_src = 0;
  double L_norm = 0, R_norm = 0;
  double w_pxy = 0, w_near = 0, w_far = 0, w_own = 0;
};

struct FactorLevel {
  std::vector<FactorCluster> clusters;
  IndexList row_offsets;   // prefix sums of row sizes
  IndexList skel_offsets;  // prefix sums of ranks
  long total_rows = 0;
  long total_skel = 0;
};

struct SingleLevelFactor {
  OperatorSpec spec;
  long n = 0;
  FactorLevel level;
  MatrixXd S;  // total_skel x total_skel, zero diagonal blocks
  Eigen::PartialPivLU<MatrixXd> reduced;  // blkdiag(Dhat) + S
};

struct MultiLevelFactor {
  OperatorSpec spec;
  long n = 0;
  double alpha = 0;
  double tol = 0;
  std::vector<FactorLevel> levels;  // skeletonized levels, leaf first
  MatrixXd root_S;                  // zero-diagonal original entries
  Eigen::PartialPivLU<MatrixXd> root;  // root_S + blkdiag(last Dhat)
  long root_size = 0;
  // model inputs gathered during compression
  double max_L_norm = 0, max_R_norm = 0, max_proxy_radius = 0;
  std::vector<ClusterSkeleton> skeleton_diags;  // interp matrices dropped
  std::vector<long> proxy_counts_per_level;
};

}  // namespace qbxfds
