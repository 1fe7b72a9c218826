#include "qbxfds/id.hpp"

#include <cmath>

namespace qbxfds {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

IdResult cpqr_id(const MatrixXd& M, const IdOptions& opts) {
  const bool tol_mode = opts.tol >= 0;
  const bool rank_mode = opts.rank >= 0;
  if (tol_mode == rank_mode)
    throw ParameterError("id: give exactly one of tolerance or rank");
  if (!M.allFinite()) throw ParameterError("id: non-finite entries");

  const long m = M.rows(), n = M.cols();
  long kmax = std::min(m, n);
  if (rank_mode) kmax = std::min(kmax, opts.rank);

  MatrixXd A = M;
  IndexList perm(n);
  for (long c = 0; c < n; ++c) perm[c] = c;
  VectorXd norms2(n), orig2(n);
  for (long c = 0; c < n; ++c) norms2[c] = A.col(c).squaredNorm();
  orig2 = norms2;

  double scale0 = 0;
  long k = 0;
  VectorXd v(m), w(n);
  for (long j = 0; j < kmax; ++j) {
    // pivot: largest remaining column norm, ties to the lowest column index
    long best = j;
    for (long c = j + 1; c < n; ++c) {
      if (norms2[c] > norms2[best] ||
          (norms2[c] == norms2[best] && perm[c] < perm[best]))
        best = c;
    }
    double pivot = std::sqrt(std::max(0.0, norms2[best]));
    if (j == 0) scale0 = pivot;
    if (pivot == 0) break;
    if (tol_mode && pivot <= opts.tol * scale0) break;
    if (best != j) {
      A.col(j).swap(A.col(best));
      std::swap(perm[j], perm[best]);
      std::swap(norms2[j], norms2[best]);
      std::swap(orig2[j], orig2[best]);
    }

    // Householder reflector for column j
    const long tail_rows = m - j;
    auto x = A.col(j).segment(j, tail_rows);
    const double sigma = x.norm();
    const double alpha = x[0] >= 0 ? -sigma : sigma;
    v.segment(j, tail_rows) = x;
    v[j] -= alpha;
    const double vnorm2 = v.segment(j, tail_rows).squaredNorm();
    if (vnorm2 > 0 && n - j - 1 > 0) {
      const double beta = 2.0 / vnorm2;
      auto trailing = A.block(j, j + 1, tail_rows, n - j - 1);
      w.head(n - j - 1).noalias() =
          beta * (trailing.transpose() * v.segment(j, tail_rows));
      trailing.noalias() -=
          v.segment(j, tail_rows) * w.head(n - j - 1).transpose();
    }
    A(j, j) = alpha;
    ++k;

    for (long c = j + 1; c < n; ++c) {
      norms2[c] -= A(j, c) * A(j, c);
      if (norms2[c] < 1e-6 * orig2[c]) {
        norms2[c] = A.col(c).segment(j + 1, m - j - 1).squaredNorm();
        orig2[c] = norms2[c];
      }
    }
  }

  IdResult res;
  res.rank = k;
  res.skeleton.assign(perm.begin(), perm.begin() + k);
  res.residual = 0;
  if (k < n && k < m) {
    double worst = 0;
    for (long c = k; c < n; ++c) worst = std::max(worst, norms2[c]);
    res.residual = std::sqrt(std::max(0.0, worst));
  }

  res.interp = MatrixXd::Zero(k, n);
  for (long j = 0; j < k; ++j) res.interp(j, perm[j]) = 1.0;
  if (k > 0 && n > k) {
    MatrixXd T = A.topLeftCorner(k, k)
                     .triangularView<Eigen::Upper>()
                     .solve(A.block(0, k, k, n - k));
    for (long c = 0; c < n - k; ++c) res.interp.col(perm[k + c]) = T.col(c);
  }
  return res;
}

}  // namespace

IdResult id_columns(const MatrixXd& M, const IdOptions& opts) {
  return cpqr_id(M, opts);
}

IdResult id_rows(const MatrixXd& M, const IdOptions& opts) {
  IdResult res = cpqr_id(M.transpose(), opts);
  res.interp = res.interp.transpose().eval();
  return res;
}

}  // namespace qbxfds
