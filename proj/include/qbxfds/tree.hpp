#pragma once

#include <array>
#include <string>

#include "qbxfds/geometry.hpp"

namespace qbxfds {

struct TreeBox {
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
  int level = 0;            // depth, root = 0
  long parent = -1;
  std::array<long, 8> children;  // 2^dim entries used, -1 when absent
  bool leaf = true;
  std::vector<long> panel_ids;   // leaves only
  long node_begin = 0, node_end = 0;  // renumbered node range of the subtree
  std::array<double, 3> node_lo{0, 0, 0};  // bbox of actual node coords
  std::array<double, 3> node_hi{0, 0, 0};
};

// Index tuple of a cluster: contiguous [begin, end) in the renumbered
// ordering plus the box that owns it.
struct ClusterTuple {
  long box = -1;
  long begin = 0, end = 0;
  long size() const { return end - begin; }
};

enum class TupleSide { Rows, Columns };

// 2:1-balanced quadtree/octree over panel centroids. Whole panels are
// assigned to leaves; nodes are renumbered so every subtree is contiguous.
class ClusterTree {
 public:
  static constexpr int kMaxDepth = 24;

  int dim = 2;
  long n_nodes = 0;
  int n_box_levels = 0;   // deepest box level + 1
  std::vector<TreeBox> boxes;
  IndexList leaves;       // nonempty leaf box ids, DFS order
  IndexList new_to_old;   // renumbered position -> original node index
  IndexList old_to_new;

  int n_levels() const { return n_box_levels; }  // solver levels incl. root

  // Partition of 0..n-1 at solver level l (0 = leaves, n_levels-1 = root).
  // Rows and columns share the tree; the side flag is for API symmetry.
  std::vector<ClusterTuple> level_tuples(int level,
                                         TupleSide side = TupleSide::Rows) const;

  // Original node indices (ascending) within `radius` of `center`.
  IndexList area_query(const double* center, double radius) const;

  // Original node ids of a box's subtree, in renumbered order.
  IndexList box_node_ids(long box) const;

  void dump(const std::string& path) const;

 private:
  friend ClusterTree build_tree(const Discretization&, long);
  PointMatrix node_coords_;  // renumbered order, for queries
};

ClusterTree build_tree(const Discretization& disc, long max_panels_per_leaf);

}  // namespace qbxfds
