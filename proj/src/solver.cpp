#include "qbxfds/solver.hpp"

#include <cmath>
#include <unordered_map>

namespace qbxfds {

namespace {

VectorXd gather(const VectorXd& full, const IndexList& ids) {
  VectorXd out(static_cast<long>(ids.size()));
  for (size_t j = 0; j < ids.size(); ++j) out[j] = full[ids[j]];
  return out;
}

void check_finite(const MatrixXd& M, const char* what, long block) {
  if (!M.allFinite())
    throw SingularBlockError(std::string(what) + " produced non-finite values",
                             block);
}

// Skeletonizes one cluster on both sides and reconciles the ranks so the
// reduced diagonal blocks are square.
void skeletonize_cluster(FactorCluster& c, const ClusterTree& tree,
                         const OperatorSpec& spec, const Discretization& disc,
                         const SkelParams& params,
                         const std::vector<char>& active_tgt,
                         const std::vector<char>& active_src,
                         ClusterSkeleton& out_t, ClusterSkeleton& out_s) {
  ProxyBall proxy_t = proxy_geometry(c.row_ids, params.alpha, disc);
  add_proxy_points(proxy_t, params.proxy_count, disc.dim);
  const NearFarSplit split_t =
      split_near_far(tree, proxy_t, c.col_ids, active_src);
  ClusterSkeleton skel_t =
      skeletonize_target(c.row_ids, proxy_t, split_t, spec, disc, params);

  ProxyBall proxy_s = proxy_geometry(c.col_ids, params.alpha, disc);
  add_proxy_points(proxy_s, params.proxy_count, disc.dim);
  const NearFarSplit split_s =
      split_near_far(tree, proxy_s, c.row_ids, active_tgt);
  ClusterSkeleton skel_s =
      skeletonize_source(c.col_ids, proxy_s, split_s, spec, disc, params);

  // equalize ranks (extend the smaller ID; greedy pivots nest)
  const long cap_t = std::min<long>(
      c.row_ids.size(), proxy_t.points.rows() + split_t.near_ids.size());
  const long cap_s = std::min<long>(
      c.col_ids.size(), proxy_s.points.rows() + split_s.near_ids.size());
  long k = std::max<long>({1, static_cast<long>(skel_t.skeleton.size()),
                           static_cast<long>(skel_s.skeleton.size())});
  k = std::min<long>({k, cap_t, cap_s});
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (static_cast<long>(skel_t.skeleton.size()) != k)
      skel_t = skeletonize_target(c.row_ids, proxy_t, split_t, spec, disc,
                                  params, k);
    if (static_cast<long>(skel_s.skeleton.size()) != k)
      skel_s = skeletonize_source(c.col_ids, proxy_s, split_s, spec, disc,
                                  params, k);
    const long kt = static_cast<long>(skel_t.skeleton.size());
    const long ks = static_cast<long>(skel_s.skeleton.size());
    if (kt == ks) break;
    k = std::min(kt, ks);
  }
  if (skel_t.skeleton.size() != skel_s.skeleton.size())
    throw SingularBlockError("rank reconciliation failed", c.box);

  c.row_skel = skel_t.skeleton;
  c.col_skel = skel_s.skeleton;
  c.L = std::move(skel_t.interp);
  c.R = std::move(skel_s.interp);
  c.L_norm = skel_t.interp_norm;
  c.R_norm = skel_s.interp_norm;
  c.proxy_radius_tgt = proxy_t.proxy_radius;
  c.proxy_radius_src = proxy_s.proxy_radius;
  c.near_size_tgt = static_cast<long>(split_t.near_ids.size());
  c.near_size_src = static_cast<long>(split_s.near_ids.size());
  c.w_pxy = skel_t.proxy_weight;
  c.w_near = skel_t.near_weight_norm;
  c.w_far = skel_t.far_weight_norm;
  c.w_own = skel_s.own_weight_norm;

  skel_t.interp.resize(0, 0);
  skel_s.interp.resize(0, 0);
  out_t = std::move(skel_t);
  out_s = std::move(skel_s);
}

// Builds the skeletonized levels shared by the single- and multi-level
// factorizations. Levels stop before the first level with a single cluster.
std::vector<FactorLevel> build_levels(const OperatorSpec& spec,
                                      const Discretization& disc,
                                      const ClusterTree& tree,
                                      const CompressOptions& opts,
                                      MultiLevelFactor* diag_sink,
                                      int max_levels = -1) {
  if (tree.leaves.size() < 2)
    throw ParameterError("compress: need at least two leaf clusters");
  const long n = disc.size();
  std::vector<FactorLevel> levels;

  for (int lev = 0; lev < tree.n_levels(); ++lev) {
    const auto tuples = tree.level_tuples(lev);
    if (tuples.size() <= 1) break;
    if (max_levels >= 0 && lev >= max_levels) break;

    FactorLevel level;
    level.clusters.resize(tuples.size());
    std::unordered_map<long, long> box_to_idx;
    for (size_t i = 0; i < tuples.size(); ++i)
      box_to_idx.emplace(tuples[i].box, static_cast<long>(i));

    if (lev == 0) {
      for (size_t i = 0; i < tuples.size(); ++i) {
        FactorCluster& c = level.clusters[i];
        c.box = tuples[i].box;
        c.row_ids = tree.box_node_ids(c.box);
        c.col_ids = c.row_ids;
      }
    } else {
      const FactorLevel& prev = levels.back();
      for (size_t j = 0; j < prev.clusters.size(); ++j) {
        long b = prev.clusters[j].box;
        long owner = -1;
        while (b >= 0) {
          auto it = box_to_idx.find(b);
          if (it != box_to_idx.end()) {
            owner = it->second;
            break;
          }
          b = tree.boxes[b].parent;
        }
        if (owner < 0)
          throw SingularBlockError("cluster has no parent at next level", j);
        level.clusters[owner].children.push_back(static_cast<long>(j));
      }
      for (auto& c : level.clusters) {
        long off = 0;
        for (long ch : c.children) {
          const FactorCluster& pc = prev.clusters[ch];
          c.child_offsets.push_back(off);
          off += static_cast<long>(pc.row_skel.size());
          c.row_ids.insert(c.row_ids.end(), pc.row_skel.begin(),
                           pc.row_skel.end());
          c.col_ids.insert(c.col_ids.end(), pc.col_skel.begin(),
                           pc.col_skel.end());
        }
      }
      for (size_t i = 0; i < tuples.size(); ++i)
        level.clusters[i].box = tuples[i].box;
    }

    std::vector<char> active_tgt(n, 0), active_src(n, 0);
    for (const auto& c : level.clusters) {
      for (long id : c.row_ids) active_tgt[id] = 1;
      for (long id : c.col_ids) active_src[id] = 1;
    }

    SkelParams params;
    params.alpha = opts.alpha;
    params.tol = opts.tol;
    params.use_proxy_weight = opts.use_proxy_weight;
    params.proxy_count = opts.proxy_count;
    if (opts.auto_proxy) {
      double R_level = 0;
      for (const auto& c : level.clusters) {
        R_level = std::max(
            R_level, proxy_geometry(c.row_ids, opts.alpha, disc).proxy_radius);
        R_level = std::max(
            R_level, proxy_geometry(c.col_ids, opts.alpha, disc).proxy_radius);
      }
      params.proxy_count =
          estimate_proxy_order(disc.dim, opts.tol, opts.alpha, R_level,
                               opts.constants)
              .count;
    }
    if (diag_sink)
      diag_sink->proxy_counts_per_level.push_back(params.proxy_count);

    const long nc = static_cast<long>(level.clusters.size());
    std::vector<ClusterSkeleton> diag_t(nc), diag_s(nc);
    const bool outer_parallel = nc >= 2 * thread_count();
    auto work = [&](long i) {
      skeletonize_cluster(level.clusters[i], tree, spec, disc, params,
                          active_tgt, active_src, diag_t[i], diag_s[i]);
    };
    if (outer_parallel) {
      parallel_for(nc, work);
    } else {
      for (long i = 0; i < nc; ++i) work(i);
    }

    // diagonal blocks and reduced inverses
    const FactorLevel* prev = levels.empty() ? nullptr : &levels.back();
    auto build_diag = [&](long i) {
      FactorCluster& c = level.clusters[i];
      MatrixXd D = assemble_block(spec, disc, c.row_ids, c.col_ids).values;
      MatrixXd D_eff = D;
      if (lev > 0) {
        for (size_t ci = 0; ci < c.children.size(); ++ci) {
          const FactorCluster& pc = prev->clusters[c.children[ci]];
          const long o = c.child_offsets[ci];
          const long kc = static_cast<long>(pc.row_skel.size());
          D.block(o, o, kc, kc).setZero();
          D_eff.block(o, o, kc, kc) = pc.Dhat;
        }
      }
      c.D = std::move(D);
      c.D_eff.compute(D_eff);
      MatrixXd M = c.R * c.D_eff.solve(c.L);
      check_finite(M, "reduced diagonal block", i);
      c.Dhat = M.partialPivLu().inverse();
      check_finite(c.Dhat, "reduced diagonal block inverse", i);
    };
    if (outer_parallel) {
      parallel_for(nc, build_diag);
    } else {
      for (long i = 0; i < nc; ++i) build_diag(i);
    }

    level.row_offsets.resize(nc + 1, 0);
    level.skel_offsets.resize(nc + 1, 0);
    for (long i = 0; i < nc; ++i) {
      level.row_offsets[i + 1] =
          level.row_offsets[i] +
          static_cast<long>(level.clusters[i].row_ids.size());
      level.skel_offsets[i + 1] =
          level.skel_offsets[i] +
          static_cast<long>(level.clusters[i].row_skel.size());
    }
    level.total_rows = level.row_offsets[nc];
    level.total_skel = level.skel_offsets[nc];

    if (diag_sink) {
      for (long i = 0; i < nc; ++i) {
        diag_sink->skeleton_diags.push_back(std::move(diag_t[i]));
        diag_sink->skeleton_diags.push_back(std::move(diag_s[i]));
        diag_sink->max_L_norm =
            std::max(diag_sink->max_L_norm, level.clusters[i].L_norm);
        diag_sink->max_R_norm =
            std::max(diag_sink->max_R_norm, level.clusters[i].R_norm);
        diag_sink->max_proxy_radius = std::max(
            {diag_sink->max_proxy_radius, level.clusters[i].proxy_radius_tgt,
             level.clusters[i].proxy_radius_src});
      }
    }

    levels.push_back(std::move(level));
  }
  if (levels.empty())
    throw ParameterError("compress: tree produced no multi-cluster level");
  return levels;
}

// Off-diagonal skeleton matrix over the given level's retained points,
// zero diagonal blocks.
MatrixXd assemble_skeleton_matrix(const OperatorSpec& spec,
                                  const Discretization& disc,
                                  const FactorLevel& level) {
  IndexList rows, cols;
  for (const auto& c : level.clusters) {
    rows.insert(rows.end(), c.row_skel.begin(), c.row_skel.end());
    cols.insert(cols.end(), c.col_skel.begin(), c.col_skel.end());
  }
  MatrixXd S = assemble_block(spec, disc, rows, cols).values;
  const long nc = static_cast<long>(level.clusters.size());
  for (long i = 0; i < nc; ++i) {
    const long o = level.skel_offsets[i];
    const long k = level.skel_offsets[i + 1] - o;
    S.block(o, o, k, k).setZero();
  }
  return S;
}

}  // namespace

SingleLevelFactor compress_single_level(const OperatorSpec& spec,
                                        const Discretization& disc,
                                        const ClusterTree& tree,
                                        const CompressOptions& opts) {
  SingleLevelFactor f;
  f.spec = spec;
  f.n = disc.size();
  auto levels = build_levels(spec, disc, tree, opts, nullptr, 1);
  f.level = std::move(levels.front());
  f.S = assemble_skeleton_matrix(spec, disc, f.level);

  MatrixXd M = f.S;
  const long nc = static_cast<long>(f.level.clusters.size());
  for (long i = 0; i < nc; ++i) {
    const long o = f.level.skel_offsets[i];
    const long k = f.level.skel_offsets[i + 1] - o;
    M.block(o, o, k, k) = f.level.clusters[i].Dhat;
  }
  f.reduced.compute(M);
  if (!f.reduced.matrixLU().diagonal().allFinite())
    throw SingularBlockError("reduced system singular", -1);
  return f;
}

VectorXd solve_single_level(const SingleLevelFactor& f, const VectorXd& b) {
  if (b.size() != f.n) throw ParameterError("solve: rhs length mismatch");
  const auto& level = f.level;
  const long nc = static_cast<long>(level.clusters.size());
  VectorXd bhat(level.total_skel);
  std::vector<VectorXd> bsegs(nc);
  for (long i = 0; i < nc; ++i) {
    const FactorCluster& c = level.clusters[i];
    bsegs[i] = gather(b, c.row_ids);
    const long o = level.skel_offsets[i];
    bhat.segment(o, c.row_skel.size()) =
        c.Dhat * (c.R * c.D_eff.solve(bsegs[i]));
  }
  const VectorXd shat = f.reduced.solve(bhat);
  VectorXd sigma(f.n);
  for (long i = 0; i < nc; ++i) {
    const FactorCluster& c = level.clusters[i];
    const long o = level.skel_offsets[i];
    const long k = static_cast<long>(c.row_skel.size());
    const VectorXd t = bhat.segment(o, k) - c.Dhat * shat.segment(o, k);
    const VectorXd x = c.D_eff.solve((bsegs[i] - c.L * t).eval());
    for (size_t j = 0; j < c.col_ids.size(); ++j) sigma[c.col_ids[j]] = x[j];
  }
  return sigma;
}

MatrixXd reconstruct_single_level(const SingleLevelFactor& f) {
  MatrixXd A = MatrixXd::Zero(f.n, f.n);
  const auto& level = f.level;
  const long nc = static_cast<long>(level.clusters.size());
  for (long i = 0; i < nc; ++i) {
    const FactorCluster& ci = level.clusters[i];
    const long oi = level.skel_offsets[i];
    const long ki = static_cast<long>(ci.row_skel.size());
    for (long j = 0; j < nc; ++j) {
      const FactorCluster& cj = level.clusters[j];
      const long oj = level.skel_offsets[j];
      const long kj = static_cast<long>(cj.row_skel.size());
      MatrixXd block;
      if (i == j) {
        block = ci.D;
      } else {
        block = ci.L * f.S.block(oi, oj, ki, kj) * cj.R;
      }
      for (size_t r = 0; r < ci.row_ids.size(); ++r)
        for (size_t c2 = 0; c2 < cj.col_ids.size(); ++c2)
          A(ci.row_ids[r], cj.col_ids[c2]) = block(r, c2);
    }
  }
  return A;
}

MultiLevelFactor compress_multilevel(const OperatorSpec& spec,
                                     const Discretization& disc,
                                     const ClusterTree& tree,
                                     const CompressOptions& opts) {
  MultiLevelFactor f;
  f.spec = spec;
  f.n = disc.size();
  f.alpha = opts.alpha;
  f.tol = opts.tol;
  f.levels = build_levels(spec, disc, tree, opts, &f);

  const FactorLevel& last = f.levels.back();
  f.root_S = assemble_skeleton_matrix(spec, disc, last);
  f.root_size = last.total_skel;
  MatrixXd M = f.root_S;
  for (size_t i = 0; i < last.clusters.size(); ++i) {
    const long o = last.skel_offsets[i];
    const long k = last.skel_offsets[i + 1] - o;
    M.block(o, o, k, k) = last.clusters[i].Dhat;
  }
  f.root.compute(M);
  if (!f.root.matrixLU().diagonal().allFinite())
    throw SingularBlockError("root system singular", -1);
  return f;
}

VectorXd solve_multilevel(const MultiLevelFactor& f, const VectorXd& b) {
  if (b.size() != f.n) throw ParameterError("solve: rhs length mismatch");
  const long L = static_cast<long>(f.levels.size());
  std::vector<VectorXd> bvec(L), bhat(L);

  // upward sweep: compress the right-hand side
  for (long l = 0; l < L; ++l) {
    const FactorLevel& level = f.levels[l];
    const long nc = static_cast<long>(level.clusters.size());
    if (l == 0) {
      bvec[0].resize(level.total_rows);
      for (long i = 0; i < nc; ++i)
        bvec[0].segment(level.row_offsets[i],
                        level.clusters[i].row_ids.size()) =
            gather(b, level.clusters[i].row_ids);
    } else {
      const FactorLevel& prevl = f.levels[l - 1];
      bvec[l].resize(level.total_rows);
      for (long i = 0; i < nc; ++i) {
        const FactorCluster& c = level.clusters[i];
        for (size_t ci = 0; ci < c.children.size(); ++ci) {
          const long ch = c.children[ci];
          const long kc =
              static_cast<long>(prevl.clusters[ch].row_skel.size());
          bvec[l].segment(level.row_offsets[i] + c.child_offsets[ci], kc) =
              bhat[l - 1].segment(prevl.skel_offsets[ch], kc);
        }
      }
    }
    bhat[l].resize(level.total_skel);
    parallel_for(nc, [&](long i) {
      const FactorCluster& c = level.clusters[i];
      const VectorXd bi =
          bvec[l].segment(level.row_offsets[i], c.row_ids.size());
      bhat[l].segment(level.skel_offsets[i], c.row_skel.size()) =
          c.Dhat * (c.R * c.D_eff.solve(bi));
    });
  }

  // root solve
  VectorXd xcur = f.root.solve(bhat[L - 1]);

  // downward sweep: recover per-level solutions
  for (long l = L - 1; l >= 0; --l) {
    const FactorLevel& level = f.levels[l];
    const long nc = static_cast<long>(level.clusters.size());
    VectorXd xlev(level.total_rows);
    parallel_for(nc, [&](long i) {
      const FactorCluster& c = level.clusters[i];
      const long o = level.skel_offsets[i];
      const long k = static_cast<long>(c.row_skel.size());
      const VectorXd t =
          bhat[l].segment(o, k) - c.Dhat * xcur.segment(o, k);
      const VectorXd bi =
          bvec[l].segment(level.row_offsets[i], c.row_ids.size());
      xlev.segment(level.row_offsets[i], c.col_ids.size()) =
          c.D_eff.solve((bi - c.L * t).eval());
    });
    if (l == 0) {
      VectorXd sigma(f.n);
      for (long i = 0; i < nc; ++i) {
        const FactorCluster& c = level.clusters[i];
        const long o = level.row_offsets[i];
        for (size_t j = 0; j < c.col_ids.size(); ++j)
          sigma[c.col_ids[j]] = xlev[o + j];
      }
      return sigma;
    }
    // expose each child's slice as the next xcur
    const FactorLevel& prevl = f.levels[l - 1];
    VectorXd xnext(prevl.total_skel);
    for (long i = 0; i < nc; ++i) {
      const FactorCluster& c = level.clusters[i];
      for (size_t ci = 0; ci < c.children.size(); ++ci) {
        const long ch = c.children[ci];
        const long kc = static_cast<long>(prevl.clusters[ch].col_skel.size());
        xnext.segment(prevl.skel_offsets[ch], kc) =
            xlev.segment(level.row_offsets[i] + c.child_offsets[ci], kc);
      }
    }
    xcur = std::move(xnext);
  }
  throw std::logic_error("unreachable");
}

VectorXd apply_multilevel(const MultiLevelFactor& f, const VectorXd& sigma) {
  if (sigma.size() != f.n) throw ParameterError("apply: length mismatch");
  const long L = static_cast<long>(f.levels.size());
  std::vector<VectorXd> input(L), w(L);

  for (long l = 0; l < L; ++l) {
    const FactorLevel& level = f.levels[l];
    const long nc = static_cast<long>(level.clusters.size());
    input[l].resize(level.total_rows);
    if (l == 0) {
      for (long i = 0; i < nc; ++i)
        input[0].segment(level.row_offsets[i],
                         level.clusters[i].col_ids.size()) =
            gather(sigma, level.clusters[i].col_ids);
    } else {
      const FactorLevel& prevl = f.levels[l - 1];
      for (long i = 0; i < nc; ++i) {
        const FactorCluster& c = level.clusters[i];
        for (size_t ci = 0; ci < c.children.size(); ++ci) {
          const long ch = c.children[ci];
          const long kc =
              static_cast<long>(prevl.clusters[ch].col_skel.size());
          input[l].segment(level.row_offsets[i] + c.child_offsets[ci], kc) =
              w[l - 1].segment(prevl.skel_offsets[ch], kc);
        }
      }
    }
    w[l].resize(level.total_skel);
    parallel_for(nc, [&](long i) {
      const FactorCluster& c = level.clusters[i];
      w[l].segment(level.skel_offsets[i], c.col_skel.size()) =
          c.R * input[l].segment(level.row_offsets[i], c.col_ids.size());
    });
  }

  VectorXd zcur = f.root_S * w[L - 1];

  for (long l = L - 1; l >= 0; --l) {
    const FactorLevel& level = f.levels[l];
    const long nc = static_cast<long>(level.clusters.size());
    VectorXd zlev(level.total_rows);
    parallel_for(nc, [&](long i) {
      const FactorCluster& c = level.clusters[i];
      zlev.segment(level.row_offsets[i], c.row_ids.size()) =
          c.D * input[l].segment(level.row_offsets[i], c.col_ids.size()) +
          c.L * zcur.segment(level.skel_offsets[i], c.row_skel.size());
    });
    if (l == 0) {
      VectorXd bout(f.n);
      for (long i = 0; i < nc; ++i) {
        const FactorCluster& c = level.clusters[i];
        const long o = level.row_offsets[i];
        for (size_t j = 0; j < c.row_ids.size(); ++j)
          bout[c.row_ids[j]] = zlev[o + j];
      }
      return bout;
    }
    const FactorLevel& prevl = f.levels[l - 1];
    VectorXd znext(prevl.total_skel);
    for (long i = 0; i < nc; ++i) {
      const FactorCluster& c = level.clusters[i];
      for (size_t ci = 0; ci < c.children.size(); ++ci) {
        const long ch = c.children[ci];
        const long kc = static_cast<long>(prevl.clusters[ch].row_skel.size());
        znext.segment(prevl.skel_offsets[ch], kc) =
            zlev.segment(level.row_offsets[i] + c.child_offsets[ci], kc);
      }
    }
    zcur = std::move(znext);
  }
  throw std::logic_error("unreachable");
}

void factor_stats_csv(const MultiLevelFactor& f, const std::string& path,
                      const std::vector<std::string>& metadata) {
  CsvWriter csv(path, metadata,
                {"level", "clusters", "mean_skeleton", "max_skeleton",
                 "active_size", "memory_mb"});
  for (size_t l = 0; l < f.levels.size(); ++l) {
    const FactorLevel& level = f.levels[l];
    double mean_k = 0, max_k = 0, mem = 0;
    for (const auto& c : level.clusters) {
      mean_k += static_cast<double>(c.row_skel.size());
      max_k = std::max(max_k, static_cast<double>(c.row_skel.size()));
      mem += static_cast<double>(c.L.size() + c.R.size() + c.D.size() * 2 +
                                 c.Dhat.size()) *
             8;
    }
    mean_k /= static_cast<double>(level.clusters.size());
    csv.row({static_cast<double>(l),
             static_cast<double>(level.clusters.size()), mean_k, max_k,
             static_cast<double>(level.total_rows), mem / (1024 * 1024)});
  }
}

}  // namespace qbxfds
