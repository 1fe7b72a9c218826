#include "qbxfds/skeleton.hpp"

#include <cmath>

namespace qbxfds {

namespace {
constexpr double kPi = 3.14159265358979323846;

PointMatrix gather_points(const Discretization& disc, const IndexList& ids) {
  PointMatrix out(static_cast<long>(ids.size()), disc.dim);
  for (size_t j = 0; j < ids.size(); ++j) out.row(j) = disc.nodes.row(ids[j]);
  return out;
}

PointMatrix gather_normals(const Discretization& disc, const IndexList& ids) {
  PointMatrix out(static_cast<long>(ids.size()), disc.dim);
  for (size_t j = 0; j < ids.size(); ++j)
    out.row(j) = disc.normals.row(ids[j]);
  return out;
}

VectorXd gather_weights(const Discretization& disc, const IndexList& ids) {
  VectorXd out(static_cast<long>(ids.size()));
  for (size_t j = 0; j < ids.size(); ++j) out[j] = disc.weights[ids[j]];
  return out;
}

double spectral_norm(const MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::BDCSVD<MatrixXd> svd(M);
  return svd.singularValues()[0];
}

}  // namespace

ProxyBall proxy_geometry(const IndexList& cluster, double alpha,
                         const Discretization& disc) {
  if (!(alpha > 1))
    throw ParameterError("make_proxy: proxy factor alpha must exceed 1");
  if (cluster.empty()) throw ParameterError("make_proxy: empty cluster");
  if (!disc.has_qbx())
    throw ParameterError("make_proxy: attach qbx centers first");

  const int dim = disc.dim;
  ProxyBall ball;
  ball.center = VectorXd::Zero(dim);
  for (long id : cluster) ball.center += disc.nodes.row(id).transpose();
  ball.center /= static_cast<double>(cluster.size());

  for (long id : cluster) {
    const double d = (disc.nodes.row(id).transpose() - ball.center).norm();
    ball.cluster_radius = std::max(ball.cluster_radius, d);
    ball.max_qbx_radius = std::max(ball.max_qbx_radius, disc.qbx_radii[id]);
  }
  ball.proxy_radius = alpha * (ball.cluster_radius + ball.max_qbx_radius);

  // The QBX expansion balls must stay strictly inside the proxy surface.
  for (long id : cluster) {
    const double reach =
        (disc.qbx_centers.row(id).transpose() - ball.center).norm() +
        disc.qbx_radii[id];
    if (reach >= ball.proxy_radius)
      throw CollisionError(
          "make_proxy: a qbx expansion ball reaches the proxy surface; "
          "increase alpha or refine");
  }
  return ball;
}

void add_proxy_points(ProxyBall& ball, long q, int dim) {
  if (q < 1) throw ParameterError("make_proxy: need at least one proxy point");
  if (dim == 2) {
    ball.points.resize(q, 2);
    ball.weights.resize(q);
    for (long k = 0; k < q; ++k) {
      const double th = 2 * kPi * k / q;
      ball.points(k, 0) = ball.center[0] + ball.proxy_radius * std::cos(th);
      ball.points(k, 1) = ball.center[1] + ball.proxy_radius * std::sin(th);
      ball.weights[k] = 2 * kPi * ball.proxy_radius / q;
    }
  } else {
    const SphereRule rule = sphere_rule(sphere_rule_order_for_count(q));
    const long qr = rule.points.rows();
    ball.points.resize(qr, 3);
    ball.weights.resize(qr);
    for (long k = 0; k < qr; ++k) {
      ball.points.row(k) = ball.center.transpose() +
                           ball.proxy_radius * rule.points.row(k);
      ball.weights[k] =
          rule.weights[k] * ball.proxy_radius * ball.proxy_radius;
    }
  }
}

ProxyBall make_proxy(const IndexList& cluster, double alpha, long q,
                     const Discretization& disc) {
  ProxyBall ball = proxy_geometry(cluster, alpha, disc);
  add_proxy_points(ball, q, disc.dim);
  return ball;
}

NearFarSplit split_near_far(const ClusterTree& tree, const ProxyBall& proxy,
                            const IndexList& cluster,
                            const std::vector<char>& active) {
  std::vector<char> own(active.size(), 0);
  for (long id : cluster) own[id] = 1;

  NearFarSplit split;
  const IndexList inside =
      tree.area_query(proxy.center.data(), proxy.proxy_radius);
  std::vector<char> near_mask(active.size(), 0);
  for (long id : inside) {
    if (active[id] && !own[id]) {
      split.near_ids.push_back(id);
      near_mask[id] = 1;
    }
  }
  for (long id = 0; id < static_cast<long>(active.size()); ++id) {
    if (active[id] && !own[id] && !near_mask[id]) split.far_ids.push_back(id);
  }
  return split;
}

namespace {

// Proxy-column scale W(P): the spectral norm of the diagonal near-field
// weight matrix, i.e. its largest entry; mean cluster weight when the near
// field is empty.
double proxy_weight_scalar(const Discretization& disc, const IndexList& near,
                           const IndexList& cluster) {
  if (!near.empty()) {
    double w = 0;
    for (long id : near) w = std::max(w, disc.weights[id]);
    return w;
  }
  double mean = 0;
  for (long id : cluster) mean += disc.weights[id];
  return mean / static_cast<double>(cluster.size());
}

void fill_diag_norms(const Discretization& disc, const NearFarSplit& split,
                     const IndexList& cluster, ClusterSkeleton& skel) {
  skel.near_weight_norm = 0;
  for (long id : split.near_ids)
    skel.near_weight_norm = std::max(skel.near_weight_norm, disc.weights[id]);
  skel.far_weight_norm = 0;
  for (long id : split.far_ids)
    skel.far_weight_norm = std::max(skel.far_weight_norm, disc.weights[id]);
  skel.own_weight_norm = 0;
  for (long id : cluster)
    skel.own_weight_norm = std::max(skel.own_weight_norm, disc.weights[id]);
}

}  // namespace

ClusterSkeleton skeletonize_target(const IndexList& cluster,
                                   const ProxyBall& proxy,
                                   const NearFarSplit& split,
                                   const OperatorSpec& spec,
                                   const Discretization& disc,
                                   const SkelParams& params,
                                   long forced_rank) {
  if (cluster.empty())
    throw ParameterError("skeletonize_target: empty cluster");
  const long ni = static_cast<long>(cluster.size());
  const long np = proxy.points.rows();
  const long nn = static_cast<long>(split.near_ids.size());

  ClusterSkeleton skel;
  skel.side = SkelSide::Target;
  fill_diag_norms(disc, split, cluster, skel);
  skel.proxy_weight =
      params.use_proxy_weight
          ? proxy_weight_scalar(disc, split.near_ids, cluster)
          : 1.0;

  // B_i = [ G(X_i, P_i) W(P_i) | G(X_i, Y_near) W(Y_near) ], QBX-mediated
  // rows, single-layer interactions on both blocks.
  MatrixXd B(ni, np + nn);
  const PointMatrix near_pts = gather_points(disc, split.near_ids);
  const VectorXd near_w = gather_weights(disc, split.near_ids);
  const PointMatrix no_normals(0, disc.dim);
  parallel_for(ni, [&](long k) {
    thread_local std::vector<double> vals;
    vals.resize(std::max(np, nn));
    qbx_kernel_values(disc, spec, Layer::Single, cluster[k], proxy.points,
                      no_normals, vals.data());
    for (long j = 0; j < np; ++j) B(k, j) = vals[j] * skel.proxy_weight;
    if (nn > 0) {
      qbx_kernel_values(disc, spec, Layer::Single, cluster[k], near_pts,
                        no_normals, vals.data());
      for (long j = 0; j < nn; ++j) B(k, np + j) = vals[j] * near_w[j];
    }
  });

  const IdOptions opts = forced_rank >= 0 ? IdOptions::fixed_rank(forced_rank)
                                          : IdOptions::tolerance(params.tol);
  IdResult id = id_rows(B, opts);
  skel.local = id.skeleton;
  skel.skeleton.reserve(id.rank);
  for (long pos : id.skeleton) skel.skeleton.push_back(cluster[pos]);
  skel.interp = std::move(id.interp);
  skel.id_residual = id.residual;
  skel.interp_norm = spectral_norm(skel.interp);
  return skel;
}

ClusterSkeleton skeletonize_source(const IndexList& cluster,
                                   const ProxyBall& proxy,
                                   const NearFarSplit& split,
                                   const OperatorSpec& spec,
                                   const Discretization& disc,
                                   const SkelParams& params,
                                   long forced_rank) {
  if (cluster.empty())
    throw ParameterError("skeletonize_source: empty cluster");
  const long nj = static_cast<long>(cluster.size());
  const long np = proxy.points.rows();
  const long nn = static_cast<long>(split.near_ids.size());

  ClusterSkeleton skel;
  skel.side = SkelSide::Source;
  fill_diag_norms(disc, split, cluster, skel);
  skel.proxy_weight = 1.0;  // Method 3 applies no proxy-row weighting

  // B_j = [ K(P_j, Y_j) W(Y_j) ; K(X_near, Y_j) W(Y_j) ]: plain kernel rows
  // at the proxy points, QBX-mediated rows at the near targets.
  MatrixXd B(np + nn, nj);
  const PointMatrix src_pts = gather_points(disc, cluster);
  const PointMatrix src_normals = gather_normals(disc, cluster);
  const VectorXd src_w = gather_weights(disc, cluster);
  parallel_for(np + nn, [&](long k) {
    thread_local std::vector<double> vals;
    vals.resize(nj);
    if (k < np) {
      plain_kernel_values(spec.kernel, proxy.points.row(k).data(), src_pts,
                          src_normals, vals.data());
    } else {
      qbx_kernel_values(disc, spec, spec.kernel.layer,
                        split.near_ids[k - np], src_pts, src_normals,
                        vals.data());
    }
    for (long j = 0; j < nj; ++j) B(k, j) = vals[j] * src_w[j];
  });

  const IdOptions opts = forced_rank >= 0 ? IdOptions::fixed_rank(forced_rank)
                                          : IdOptions::tolerance(params.tol);
  IdResult id = id_columns(B, opts);
  skel.local = id.skeleton;
  skel.skeleton.reserve(id.rank);
  for (long pos : id.skeleton) skel.skeleton.push_back(cluster[pos]);
  skel.interp = std::move(id.interp);
  skel.id_residual = id.residual;
  skel.interp_norm = spectral_norm(skel.interp);
  return skel;
}

void export_skeleton_diagnostics_csv(
    const std::vector<ClusterSkeleton>& skeletons,
    const std::vector<ProxyBall>& proxies,
    const std::vector<long>& near_sizes, const std::string& path,
    const std::vector<std::string>& metadata) {
  CsvWriter csv(path, metadata,
                {"cluster", "side", "n_i", "k_i", "r_pxy", "near_size",
                 "interp_norm", "id_residual"});
  for (size_t i = 0; i < skeletons.size(); ++i) {
    const auto& s = skeletons[i];
    const long ni = s.interp.rows() >= s.interp.cols() ? s.interp.rows()
                                                       : s.interp.cols();
    csv.row({static_cast<double>(i),
             s.side == SkelSide::Target ? 0.0 : 1.0, static_cast<double>(ni),
             static_cast<double>(s.skeleton.size()),
             proxies.empty() ? 0.0 : proxies[i % proxies.size()].proxy_radius,
             near_sizes.empty() ? 0.0
                                : static_cast<double>(
                                      near_sizes[i % near_sizes.size()]),
             s.interp_norm, s.id_residual});
  }
}

}  // namespace qbxfds
