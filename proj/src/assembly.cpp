#include "qbxfds/assembly.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <unordered_map>

namespace qbxfds {

OperatorSpec OperatorSpec::interior_dirichlet_double(int dim, int qbx_order) {
  OperatorSpec spec;
  spec.kernel = KernelKind{dim, Layer::Double};
  spec.identity_coeff = -0.5;
  spec.qbx_order = qbx_order;
  spec.side = Side::Interior;
  return spec;
}

OperatorSpec OperatorSpec::first_kind_single(int dim, int qbx_order) {
  OperatorSpec spec;
  spec.kernel = KernelKind{dim, Layer::Single};
  spec.identity_coeff = 0.0;
  spec.qbx_order = qbx_order;
  spec.side = Side::Interior;
  return spec;
}

void plain_kernel_values(KernelKind kind, const double* x,
                         const Eigen::Ref<const PointMatrix>& src_points,
                         const Eigen::Ref<const PointMatrix>& src_normals,
                         double* out) {
  const long n = src_points.rows();
  for (long j = 0; j < n; ++j) {
    const double* y = src_points.row(j).data();
    if (kind.layer == Layer::Single) {
      out[j] = green(kind.dim, x, y);
    } else {
      out[j] = dlp_kernel(kind.dim, x, y, src_normals.row(j).data());
    }
  }
}

void qbx_kernel_values(const Discretization& disc, const OperatorSpec& spec,
                       Layer layer, long target,
                       const Eigen::Ref<const PointMatrix>& src_points,
                       const Eigen::Ref<const PointMatrix>& src_normals,
                       double* out) {
  if (!disc.has_qbx())
    throw ParameterError("qbx_kernel_values: attach qbx centers first");
  const long n = src_points.rows();
  const int p = spec.qbx_order;
  const double r = disc.qbx_radii[target];
  const double far2 = spec.qbx_everywhere
                          ? std::numeric_limits<double>::infinity()
                          : (spec.far_threshold * r) * (spec.far_threshold * r);
  const KernelKind kind{disc.dim, layer};

  if (disc.dim == 2) {
    const Complex c(disc.qbx_centers(target, 0), disc.qbx_centers(target, 1));
    const Complex u(disc.nodes(target, 0) - c.real(),
                    disc.nodes(target, 1) - c.imag());
    thread_local std::vector<Complex> basis, mom;
    basis.resize(p + 1);
    mom.resize(p + 1);
    qbx_basis2(u, p, basis.data());
    for (long j = 0; j < n; ++j) {
      const Complex v(src_points(j, 0) - c.real(),
                      src_points(j, 1) - c.imag());
      if (std::norm(v) > far2) {
        const double* ny =
            layer == Layer::Double ? src_normals.row(j).data() : nullptr;
        out[j] = kernel_value(kind, disc.nodes.row(target).data(),
                              src_points.row(j).data(), ny);
        continue;
      }
      Complex nrm(0, 0);
      if (layer == Layer::Double)
        nrm = Complex(src_normals(j, 0), src_normals(j, 1));
      qbx_moments2(v, nrm, layer, p, r, mom.data());
      out[j] = expansion_dot(mom.data(), basis.data(), p + 1);
    }
    return;
  }

  const Vector3d c = disc.qbx_centers.row(target).transpose();
  const Vector3d u = disc.nodes.row(target).transpose() - c;
  thread_local std::vector<Complex> basis, mom;
  thread_local MomentScratch scratch;
  qbx_basis3(u, p, basis);
  mom.resize(sh_size(p));
  for (long j = 0; j < n; ++j) {
    const Vector3d v = src_points.row(j).transpose() - c;
    if (v.squaredNorm() > far2) {
      const double* ny =
          layer == Layer::Double ? src_normals.row(j).data() : nullptr;
      out[j] = kernel_value(kind, disc.nodes.row(target).data(),
                            src_points.row(j).data(), ny);
      continue;
    }
    Vector3d nrm = Vector3d::Zero();
    if (layer == Layer::Double) nrm = src_normals.row(j).transpose();
    qbx_moments3(v, nrm, layer, p, r, scratch, mom.data());
    out[j] = expansion_dot(mom.data(), basis.data(), sh_size(p));
  }
}

namespace {

void gather(const Discretization& disc, const IndexList& ids,
            PointMatrix& pts, PointMatrix& normals, VectorXd& weights) {
  const long n = static_cast<long>(ids.size());
  pts.resize(n, disc.dim);
  normals.resize(n, disc.dim);
  weights.resize(n);
  for (long j = 0; j < n; ++j) {
    pts.row(j) = disc.nodes.row(ids[j]);
    normals.row(j) = disc.normals.row(ids[j]);
    weights[j] = disc.weights[ids[j]];
  }
}

}  // namespace

DenseBlock assemble_block(const OperatorSpec& spec, const Discretization& disc,
                          const IndexList& rows, const IndexList& cols) {
  DenseBlock block;
  block.rows = rows;
  block.cols = cols;
  const long nr = static_cast<long>(rows.size());
  const long nc = static_cast<long>(cols.size());
  block.values.resize(nr, nc);
  if (nr == 0 || nc == 0) return block;

  PointMatrix pts, normals;
  VectorXd weights;
  gather(disc, cols, pts, normals, weights);
  std::unordered_map<long, long> col_pos;
  col_pos.reserve(cols.size());
  for (long j = 0; j < nc; ++j) col_pos.emplace(cols[j], j);
  const double shift = spec.diagonal_shift();

  parallel_for(nr, [&](long k) {
    thread_local std::vector<double> vals;
    vals.resize(nc);
    qbx_kernel_values(disc, spec, spec.kernel.layer, rows[k], pts, normals,
                      vals.data());
    for (long j = 0; j < nc; ++j)
      block.values(k, j) = vals[j] * weights[j];
    auto self = col_pos.find(rows[k]);
    if (self != col_pos.end()) block.values(k, self->second) += shift;
  });
  return block;
}

MatrixXd assemble_dense(const OperatorSpec& spec, const Discretization& disc) {
  IndexList all(disc.size());
  for (long i = 0; i < disc.size(); ++i) all[i] = i;
  return assemble_block(spec, disc, all, all).values;
}

VectorXd apply_dense(const OperatorSpec& spec, const Discretization& disc,
                     const VectorXd& sigma) {
  const long n = disc.size();
  if (sigma.size() != n)
    throw ParameterError("apply_dense: density length mismatch");
  VectorXd b(n);
  const VectorXd strengths = disc.weights.cwiseProduct(sigma);
  const double shift = spec.diagonal_shift();
  parallel_for(n, [&](long k) {
    thread_local std::vector<double> vals;
    vals.resize(n);
    qbx_kernel_values(disc, spec, spec.kernel.layer, k, disc.nodes,
                      disc.normals, vals.data());
    double acc = 0;
    for (long j = 0; j < n; ++j) acc += vals[j] * strengths[j];
    b[k] = acc + shift * sigma[k];
  });
  return b;
}

VectorXd evaluate_potential(KernelKind kind, const Discretization& disc,
                            const VectorXd& sigma, const PointMatrix& targets) {
  const long nt = targets.rows();
  VectorXd out(nt);
  const VectorXd strengths = disc.weights.cwiseProduct(sigma);
  parallel_for(nt, [&](long t) {
    thread_local std::vector<double> vals;
    vals.resize(disc.size());
    plain_kernel_values(kind, targets.row(t).data(), disc.nodes, disc.normals,
                        vals.data());
    double acc = 0;
    for (long j = 0; j < disc.size(); ++j) acc += vals[j] * strengths[j];
    out[t] = acc;
  });
  return out;
}

void write_dense_binary(const MatrixXd& M, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f.good()) throw std::runtime_error("cannot open " + path);
  const uint64_t dims[2] = {static_cast<uint64_t>(M.rows()),
                            static_cast<uint64_t>(M.cols())};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (long i = 0; i < M.rows(); ++i) {
    for (long j = 0; j < M.cols(); ++j) {
      const double v = M(i, j);
      f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

MatrixXd read_dense_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f.good()) throw std::runtime_error("cannot open " + path);
  uint64_t dims[2];
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  MatrixXd M(dims[0], dims[1]);
  for (uint64_t i = 0; i < dims[0]; ++i) {
    for (uint64_t j = 0; j < dims[1]; ++j) {
      double v;
      f.read(reinterpret_cast<char*>(&v), sizeof(v));
      M(i, j) = v;
    }
  }
  if (!f.good()) throw std::runtime_error("truncated matrix file: " + path);
  return M;
}

}  // namespace qbxfds
