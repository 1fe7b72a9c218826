#pragma once

#include "qbxfds/skeleton.hpp"

namespace qbxfds {

// Constants of the skeletonization error model
//   E(q) = pref * { (1 + C0 c0 w(q)) eps_id + C1 c1 far(alpha, p(q), R) }
// with pref = (2 + ||L|| + ||R||)/2, w the proxy-sphere weight factor and
// far the multipole tail factor. c0, c1 come from measured weight and
// interpolation norms; C0, C1 are empirical fit multipliers.
struct ModelConstants {
  double c0 = 1, c1 = 1;
  double C0 = 1, C1 = 1;
  double R_pxy = 1;
  double alpha = 1.15;
};

// Per-cluster constants a0, a1 (targets) and b0 = 1, b1 (sources), maximized
// over the clusters.
ModelConstants measure_constants(const std::vector<ClusterSkeleton>& skeletons,
                                 double alpha, double R_pxy);

// Weight factor of the proxy rule: 4 pi R^2 / q (3D), 2 pi R / q (2D).
double proxy_weight_factor(int dim, long q, double R_pxy);
// Multipole tail factor: alpha^{-p} / ((alpha-1) c_d R-term).
double proxy_far_factor(int dim, double alpha, int p, double R_pxy);
// Exactness order delivered by q proxy points.
int proxy_order_from_count(int dim, long q);
long proxy_count_from_order(int dim, int p);

double model_error(int dim, long q, double alpha, double R_pxy, double eps_id,
                   const ModelConstants& constants, double L_norm,
                   double R_norm);

// Balances the two model terms: p from the closed form, clamped to [2, 32],
// and the realizable proxy count for that order.
struct ProxyEstimate {
  int order = 2;
  long count = 0;
};
ProxyEstimate estimate_proxy_order(int dim, double eps_id, double alpha,
                                   double R_pxy,
                                   const ModelConstants& constants);

// One sweep observation for the constant fit.
struct FitPoint {
  double eps_id = 0;
  long q = 0;
  double alpha = 0;
  double R_pxy = 0;
  double L_norm = 0;
  double R_norm = 0;
  double measured = 0;
};

struct FitResult {
  double C0 = 1, C1 = 1;
  bool degenerate = false;  // only one regime present in the sweep
  double log_residual = 0;
};
FitResult fit_constants(const std::vector<FitPoint>& data, int dim, double c0,
                        double c1);

// Pointwise proxy-mediated kernel reproduction error and its bound
//   |K(x,y) - sum_k P(x,p_k) w_k K(p_k,y)| <= bound(alpha_y, p)
// with alpha_y = r_pxy / |y-c|. The 2D single-layer check compensates the
// log mode exactly: the plane log kernel carries a -log(r_x)/2pi monopole
// term that the circle Poisson integral maps to -log(R)/2pi.
struct Lemma1Result {
  double measured = 0;
  double bound = 0;
};
Lemma1Result lemma1_check(int dim, const VectorXd& x, const VectorXd& y,
                          const ProxyBall& proxy, int p);

}  // namespace qbxfds
