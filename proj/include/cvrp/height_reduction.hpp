#pragma once

// Heavy-path decomposition, anchor selection and up-pushes that turn a
// tree into one of polylogarithmic height with a (1+eps) cost sandwich.

#include <vector>

#include "cvrp/instance.hpp"

namespace cvrp {

/// One path of the decomposition. nodes[0] is the top, shared with the
/// path it hangs from (or the depot); the path owns the edges into
/// nodes[1..].
struct DPath {
  std::vector<NodeId> nodes;
  int level = 1;
  int length() const { return static_cast<int>(nodes.size()) - 1; }
};

struct PathDecomposition {
  std::vector<DPath> paths;
  /// Path owning the edge into v; -1 for the depot.
  std::vector<int> path_of;
  /// Level of the path owning the edge into v; 0 for the depot.
  std::vector<int> level_of;
  int levels = 0;
};

/// Levels follow the recursion: the heavy root path is level 1, paths
/// hanging off a level-i path are level i+1. Heavy child = largest subtree,
/// ties to the smallest id.
PathDecomposition decompose_paths(const TreeInstance& inst);

/// Anchor positions (indices into path.nodes). a1 = top, a2 = its child;
/// then a_{i+1} follows the farthest node v with w(a_i, v) <= eps*w(a1, a_i).
/// The last node is always an anchor.
std::vector<int> select_anchors(const TreeInstance& inst, const DPath& path, const Rational& eps);

struct HeightParams {
  Rational eps{1, 2};
  /// Paths with at most delta*log2(n)/eps edges are kept verbatim.
  double delta = 1.0;
  /// Constant in the sandwich opt(T) <= (1 + c*eps) opt(T').
  double c = 3.0;
};

struct ReducedTree {
  TreeInstance original;
  TreeInstance tree;
  /// T node -> T' node. Node ids are kept, so this is the identity.
  std::vector<NodeId> node_map;
  PathDecomposition decomposition;
  /// Per path: anchor node ids, empty for verbatim paths.
  std::vector<std::vector<NodeId>> anchors;
  /// Nodes whose edge became weight 0 by an up-push.
  std::vector<NodeId> zeroed;
  HeightParams params;
};

ReducedTree build_reduced_tree(const TreeInstance& inst, const HeightParams& params = {});

/// Same pickups, costed on T. Throws InstanceError when `sol` is not
/// feasible on T'.
Solution lift_solution(const ReducedTree& rt, const Solution& sol);

/// Same pickups, costed on T'.
Solution project_solution(const ReducedTree& rt, const Solution& sol);

/// Sidecar lines "map <t> <t'>".
std::string save_node_map(const ReducedTree& rt);

}  // namespace cvrp
