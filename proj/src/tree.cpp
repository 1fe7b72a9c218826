#include "qbxfds/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

namespace qbxfds {

namespace {

bool centroids_coincident(const MatrixXd& centroids,
                          const std::vector<long>& ids) {
  for (size_t k = 1; k < ids.size(); ++k) {
    if ((centroids.row(ids[k]) - centroids.row(ids[0])).norm() > 1e-14)
      return false;
  }
  return true;
}

}  // namespace

ClusterTree build_tree(const Discretization& disc, long max_panels_per_leaf) {
  if (max_panels_per_leaf < 1)
    throw ParameterError("build_tree: leaf capacity must be >= 1");
  const int dim = disc.dim;
  const long np = static_cast<long>(disc.panels.size());
  ClusterTree tree;
  tree.dim = dim;
  tree.n_nodes = disc.size();

  // Root: squared bounding box of the centroids, slightly inflated.
  std::array<double, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    lo[d] = disc.centroids.col(d).minCoeff();
    hi[d] = disc.centroids.col(d).maxCoeff();
  }
  double side = 0;
  for (int d = 0; d < dim; ++d) side = std::max(side, hi[d] - lo[d]);
  side = side > 0 ? side * (1 + 1e-12) : 1.0;
  for (int d = 0; d < dim; ++d) {
    const double mid = 0.5 * (lo[d] + hi[d]);
    lo[d] = mid - 0.5 * side;
    hi[d] = mid + 0.5 * side;
  }

  TreeBox root;
  root.lo = lo;
  root.hi = hi;
  root.panel_ids.resize(np);
  for (long p = 0; p < np; ++p) root.panel_ids[p] = p;
  tree.boxes.push_back(std::move(root));

  const int nchild = 1 << dim;
  auto subdivide = [&](long b) {
    TreeBox& box = tree.boxes[b];
    if (box.level + 1 > ClusterTree::kMaxDepth)
      throw ParameterError("build_tree: maximum depth exceeded");
    std::array<double, 3> mid{0, 0, 0};
    for (int d = 0; d < dim; ++d) mid[d] = 0.5 * (box.lo[d] + box.hi[d]);
    std::vector<std::vector<long>> bins(nchild);
    for (long pid : box.panel_ids) {
      int c = 0;
      // boundary centroids go to the lower-coordinate child
      for (int d = 0; d < dim; ++d)
        if (disc.centroids(pid, d) > mid[d]) c |= 1 << d;
      bins[c].push_back(pid);
    }
    box.panel_ids.clear();
    box.leaf = false;
    for (int c = 0; c < nchild; ++c) {
      TreeBox child;
      child.level = box.level + 1;
      child.parent = b;
      for (int d = 0; d < dim; ++d) {
        child.lo[d] = (c >> d & 1) ? mid[d] : tree.boxes[b].lo[d];
        child.hi[d] = (c >> d & 1) ? tree.boxes[b].hi[d] : mid[d];
      }
      child.panel_ids = std::move(bins[c]);
      tree.boxes.push_back(std::move(child));
      tree.boxes[b].children[c] = static_cast<long>(tree.boxes.size()) - 1;
    }
  };

  // Capacity refinement.
  std::vector<long> work = {0};
  while (!work.empty()) {
    const long b = work.back();
    work.pop_back();
    TreeBox& box = tree.boxes[b];
    if (static_cast<long>(box.panel_ids.size()) <= max_panels_per_leaf)
      continue;
    if (box.level == ClusterTree::kMaxDepth) {
      if (centroids_coincident(disc.centroids, box.panel_ids)) continue;
      throw ParameterError("build_tree: depth cap hit on separable input");
    }
    subdivide(b);
    for (int c = 0; c < nchild; ++c) work.push_back(tree.boxes[b].children[c]);
  }

  // 2:1 balancing: no two touching leaves may differ by more than one level.
  auto touches = [&](long a, long b) {
    const TreeBox& A = tree.boxes[a];
    const TreeBox& B = tree.boxes[b];
    for (int d = 0; d < dim; ++d) {
      const double eps = 1e-12 * (A.hi[d] - A.lo[d] + B.hi[d] - B.lo[d]);
      if (A.lo[d] > B.hi[d] + eps || B.lo[d] > A.hi[d] + eps) return false;
    }
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<long> leaf_ids;
    for (long b = 0; b < static_cast<long>(tree.boxes.size()); ++b)
      if (tree.boxes[b].leaf) leaf_ids.push_back(b);
    for (long a : leaf_ids) {
      if (!tree.boxes[a].leaf) continue;
      for (long b : leaf_ids) {
        if (a == b || !tree.boxes[b].leaf) continue;
        if (tree.boxes[a].level > tree.boxes[b].level + 1 && touches(a, b)) {
          subdivide(b);
          changed = true;
        }
      }
    }
  }

  // DFS leaf ordering and node renumbering; panels stay whole.
  tree.new_to_old.reserve(tree.n_nodes);
  std::function<void(long)> dfs = [&](long b) {
    TreeBox& box = tree.boxes[b];
    box.node_begin = static_cast<long>(tree.new_to_old.size());
    if (box.leaf) {
      std::sort(box.panel_ids.begin(), box.panel_ids.end());
      for (long pid : box.panel_ids) {
        for (long i = disc.panels[pid].begin; i < disc.panels[pid].end; ++i)
          tree.new_to_old.push_back(i);
      }
      if (!box.panel_ids.empty()) tree.leaves.push_back(b);
    } else {
      for (int c = 0; c < nchild; ++c) dfs(box.children[c]);
    }
    box.node_end = static_cast<long>(tree.new_to_old.size());
  };
  dfs(0);

  tree.old_to_new.assign(tree.n_nodes, -1);
  for (long k = 0; k < tree.n_nodes; ++k) tree.old_to_new[tree.new_to_old[k]] = k;

  tree.n_box_levels = 0;
  for (const auto& b : tree.boxes)
    tree.n_box_levels = std::max(tree.n_box_levels, b.level + 1);

  // Node coordinate copies and per-box node bounding boxes (post-order).
  tree.node_coords_.resize(tree.n_nodes, dim);
  for (long k = 0; k < tree.n_nodes; ++k)
    tree.node_coords_.row(k) = disc.nodes.row(tree.new_to_old[k]);
  std::function<void(long)> fit = [&](long b) {
    TreeBox& box = tree.boxes[b];
    for (int d = 0; d < dim; ++d) {
      box.node_lo[d] = std::numeric_limits<double>::infinity();
      box.node_hi[d] = -std::numeric_limits<double>::infinity();
    }
    if (box.leaf) {
      for (long k = box.node_begin; k < box.node_end; ++k)
        for (int d = 0; d < dim; ++d) {
          box.node_lo[d] = std::min(box.node_lo[d], tree.node_coords_(k, d));
          box.node_hi[d] = std::max(box.node_hi[d], tree.node_coords_(k, d));
        }
    } else {
      for (int c = 0; c < nchild; ++c) {
        fit(box.children[c]);
        const TreeBox& ch = tree.boxes[box.children[c]];
        for (int d = 0; d < dim; ++d) {
          box.node_lo[d] = std::min(box.node_lo[d], ch.node_lo[d]);
          box.node_hi[d] = std::max(box.node_hi[d], ch.node_hi[d]);
        }
      }
    }
  };
  fit(0);

  return tree;
}

std::vector<ClusterTuple> ClusterTree::level_tuples(int level,
                                                    TupleSide side) const {
  (void)side;  // rows and columns share one tree (square system)
  if (level < 0 || level >= n_levels())
    throw ParameterError("level_tuples: level out of range");
  const int target_depth = (n_box_levels - 1) - level;
  std::vector<ClusterTuple> out;
  for (long b = 0; b < static_cast<long>(boxes.size()); ++b) {
    const TreeBox& box = boxes[b];
    if (box.node_begin == box.node_end) continue;
    const bool take = (box.level == target_depth) ||
                      (box.leaf && box.level < target_depth);
    if (take) out.push_back(ClusterTuple{b, box.node_begin, box.node_end});
  }
  std::sort(out.begin(), out.end(),
            [](const ClusterTuple& a, const ClusterTuple& b) {
              return a.begin < b.begin;
            });
  return out;
}

IndexList ClusterTree::area_query(const double* center, double radius) const {
  if (radius <= 0) throw ParameterError("area_query: radius must be positive");
  IndexList hits;
  const double r2 = radius * radius;
  std::vector<long> stack = {0};
  while (!stack.empty()) {
    const long b = stack.back();
    stack.pop_back();
    const TreeBox& box = boxes[b];
    if (box.node_begin == box.node_end) continue;
    double d2 = 0;
    for (int d = 0; d < dim; ++d) {
      const double v =
          std::max({box.node_lo[d] - center[d], center[d] - box.node_hi[d],
                    0.0});
      d2 += v * v;
    }
    if (d2 > r2) continue;
    if (box.leaf) {
      for (long k = box.node_begin; k < box.node_end; ++k) {
        double s = 0;
        for (int d = 0; d < dim; ++d) {
          const double v = node_coords_(k, d) - center[d];
          s += v * v;
        }
        if (s <= r2) hits.push_back(new_to_old[k]);
      }
    } else {
      for (int c = 0; c < (1 << dim); ++c)
        if (box.children[c] >= 0) stack.push_back(box.children[c]);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

IndexList ClusterTree::box_node_ids(long box) const {
  const TreeBox& b = boxes.at(box);
  IndexList out(b.node_end - b.node_begin);
  for (long k = b.node_begin; k < b.node_end; ++k)
    out[k - b.node_begin] = new_to_old[k];
  return out;
}

void ClusterTree::dump(const std::string& path) const {
  std::ofstream f(path);
  if (!f.good()) throw std::runtime_error("cannot open " + path);
  f << "# box level leaf parent children bounds panels\n";
  for (long b = 0; b < static_cast<long>(boxes.size()); ++b) {
    const TreeBox& box = boxes[b];
    f << b << " level=" << box.level << " leaf=" << box.leaf
      << " parent=" << box.parent << " children=[";
    for (int c = 0; c < (1 << dim); ++c) {
      if (box.children[c] >= 0) f << box.children[c] << " ";
    }
    f << "] lo=(";
    for (int d = 0; d < dim; ++d) f << box.lo[d] << (d + 1 < dim ? "," : "");
    f << ") hi=(";
    for (int d = 0; d < dim; ++d) f << box.hi[d] << (d + 1 < dim ? "," : "");
    f << ") panels=[";
    for (long pid : box.panel_ids) f << pid << " ";
    f << "]\n";
  }
}

}  // namespace qbxfds
