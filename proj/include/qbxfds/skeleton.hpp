#pragma once

#include "qbxfds/assembly.hpp"
#include "qbxfds/id.hpp"
#include "qbxfds/tree.hpp"

namespace qbxfds {

// Proxy sphere/circle of radius alpha * (cluster radius + max QBX expansion
// radius), sampled with q points (2D: equispaced; 3D: sphere-rule points of
// the largest order fitting in q).
struct ProxyBall {
  VectorXd center;        // dim entries
  double cluster_radius = 0;
  double max_qbx_radius = 0;
  double proxy_radius = 0;
  PointMatrix points;     // q x dim, on the proxy surface
  VectorXd weights;       // surface quadrature weights on the proxy sphere
};

ProxyBall make_proxy(const IndexList& cluster, double alpha, long q,
                     const Discretization& disc);

// Geometry part of make_proxy (center and radii, no points yet).
ProxyBall proxy_geometry(const IndexList& cluster, double alpha,
                         const Discretization& disc);
// Samples q points on the proxy surface (2D exact count, 3D the largest
// product rule with at most q points).
void add_proxy_points(ProxyBall& ball, long q, int dim);

struct NearFarSplit {
  IndexList near_ids;  // inside the proxy ball, not in the cluster
  IndexList far_ids;   // everything else (restricted to the active set)
};

// Splits the active points around the proxy ball. `active` masks the point
// set under consideration (size n, nonzero = active); at the leaf level it is
// all ones, higher levels restrict to retained skeletons.
NearFarSplit split_near_far(const ClusterTree& tree, const ProxyBall& proxy,
                            const IndexList& cluster,
                            const std::vector<char>& active);

struct SkelParams {
  double alpha = 1.15;
  long proxy_count = 64;
  double tol = 1e-8;
  bool use_proxy_weight = true;  // the W(P) scaling of the proxy columns
};

enum class SkelSide { Target, Source };

struct ClusterSkeleton {
  SkelSide side = SkelSide::Target;
  IndexList skeleton;   // original node ids, subset of the cluster
  IndexList local;      // positions of the skeleton inside the cluster list
  MatrixXd interp;      // target: n_i x k; source: k x n_j
  double interp_norm = 0;   // spectral norm of interp
  double proxy_weight = 0;  // the W(P) scalar used (1 when disabled)
  double near_weight_norm = 0;  // ||W(Y_near)||_2 = max near weight
  double far_weight_norm = 0;   // max quadrature weight outside the ball
  double own_weight_norm = 0;   // max weight within the cluster
  double id_residual = 0;
};

// Method 2: row ID of [G(X_i, P_i) W(P_i) | G(X_i, Y_near) W(Y_near)] with
// QBX-mediated target evaluation and W(P_i) = ||W(Y_near)||_2 I.
ClusterSkeleton skeletonize_target(const IndexList& cluster,
                                   const ProxyBall& proxy,
                                   const NearFarSplit& split,
                                   const OperatorSpec& spec,
                                   const Discretization& disc,
                                   const SkelParams& params,
                                   long forced_rank = -1);

// Method 3: column ID of [K(P_j, Y_j) W(Y_j); K(X_near, Y_j) W(Y_j)].
ClusterSkeleton skeletonize_source(const IndexList& cluster,
                                   const ProxyBall& proxy,
                                   const NearFarSplit& split,
                                   const OperatorSpec& spec,
                                   const Discretization& disc,
                                   const SkelParams& params,
                                   long forced_rank = -1);

void export_skeleton_diagnostics_csv(
    const std::vector<ClusterSkeleton>& skeletons,
    const std::vector<ProxyBall>& proxies,
    const std::vector<long>& near_sizes, const std::string& path,
    const std::vector<std::string>& metadata);

}  // namespace qbxfds
