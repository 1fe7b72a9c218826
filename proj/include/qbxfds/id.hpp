#pragma once

#include <Eigen/Dense>

#include "qbxfds/util.hpp"

namespace qbxfds {

// Interpolative decomposition of a dense matrix by greedy column-pivoted QR,
// O(m n k). The tolerance is relative to the largest pivoted-QR diagonal.
struct IdOptions {
  double tol = -1;  // >= 0 selects tolerance mode
  long rank = -1;   // >= 0 selects fixed-rank mode
  static IdOptions tolerance(double t) { return IdOptions{t, -1}; }
  static IdOptions fixed_rank(long k) { return IdOptions{-1, k}; }
};

struct IdResult {
  IndexList skeleton;      // k column (or row) positions, pivot order
  Eigen::MatrixXd interp;  // columns: k x n with interp[:, skeleton] = I;
                           // rows:    n x k with interp[skeleton, :] = I
  long rank = 0;
  double residual = 0;     // trailing pivot magnitude, ~ sigma_{k+1}
};

// M ~ M[:, skeleton] * interp.
IdResult id_columns(const Eigen::MatrixXd& M, const IdOptions& opts);

// M ~ interp * M[skeleton, :].
IdResult id_rows(const Eigen::MatrixXd& M, const IdOptions& opts);

}  // namespace qbxfds
