#include "cvrp/height_reduction.hpp"

#include <algorithm>
#include <cmath>

#include "cvrp/verification.hpp"

namespace cvrp {

namespace {

NodeId heavy_child(const TreeInstance& inst, NodeId v) {
  NodeId best = -1;
  for (NodeId u : inst.children(v)) {
    if (best < 0 || inst.subtree_size(u) > inst.subtree_size(best)) best = u;
  }
  return best;
}

}  // namespace

PathDecomposition decompose_paths(const TreeInstance& inst) {
  const int n = inst.size();
  PathDecomposition pd;
  pd.path_of.assign(n, -1);
  pd.level_of.assign(n, 0);
  if (n == 1) return pd;

  // (top, first child, level) of paths still to trace
  struct Pending {
    NodeId top;
    NodeId first;
    int level;
  };
  std::vector<Pending> stack{{kDepot, heavy_child(inst, kDepot), 1}};
  for (NodeId u : inst.children(kDepot)) {
    if (u != stack[0].first) stack.push_back({kDepot, u, 2});
  }
  // Trace the root path first so path 0 is the level-1 path; the rest in
  // a deterministic order.
  std::size_t next = 0;
  while (next < stack.size()) {
    const Pending p = stack[next++];
    DPath path;
    path.level = p.level;
    path.nodes.push_back(p.top);
    const int id = static_cast<int>(pd.paths.size());
    for (NodeId v = p.first; v >= 0;) {
      path.nodes.push_back(v);
      pd.path_of[v] = id;
      pd.level_of[v] = p.level;
      const NodeId h = heavy_child(inst, v);
      for (NodeId u : inst.children(v)) {
        if (u != h) stack.push_back({v, u, p.level + 1});
      }
      v = h;
    }
    pd.levels = std::max(pd.levels, p.level);
    pd.paths.push_back(std::move(path));
  }
  return pd;
}

std::vector<int> select_anchors(const TreeInstance& inst, const DPath& path, const Rational& eps) {
  const int last = path.length();
  std::vector<int> anchors{0};
  if (last < 1) return anchors;
  std::vector<Weight> prefix(last + 1, 0);
  for (int k = 1; k <= last; ++k) prefix[k] = prefix[k - 1] + inst.weight(path.nodes[k]);
  anchors.push_back(1);
  int j = 1;
  while (j < last) {
    const Rational budget = eps * Rational(prefix[j]);
    int m = j;
    while (m + 1 <= last && Rational(prefix[m + 1] - prefix[j]) <= budget) ++m;
    j = m == last ? last : m + 1;
    anchors.push_back(j);
  }
  return anchors;
}

ReducedTree build_reduced_tree(const TreeInstance& inst, const HeightParams& params) {
  const int n = inst.size();
  PathDecomposition pd = decompose_paths(inst);
  const double trigger =
      params.delta * std::log2(static_cast<double>(std::max(n, 2))) / params.eps.convert_to<double>();

  std::vector<NodeId> parent = inst.parents();
  std::vector<Weight> weight = inst.weights();
  // governor[v]: the T' node standing in for v as an attachment point.
  std::vector<NodeId> governor(n);
  for (NodeId v = 0; v < n; ++v) governor[v] = v;
  std::vector<std::vector<NodeId>> anchor_ids(pd.paths.size());
  std::vector<NodeId> zeroed;

  // Paths were recorded top-down, so every top is settled before use.
  for (std::size_t pi = 0; pi < pd.paths.size(); ++pi) {
    const DPath& path = pd.paths[pi];
    const NodeId top = path.nodes[0];
    parent[path.nodes[1]] = governor[top];
    if (path.length() <= trigger) continue;

    const std::vector<int> anchors = select_anchors(inst, path, params.eps);
    for (int a : anchors) anchor_ids[pi].push_back(path.nodes[a]);
    Weight prefix = 0;
    Weight anchor_prefix = 0;
    int current = 0;
    std::size_t next = 1;
    for (int k = 1; k <= path.length(); ++k) {
      const NodeId v = path.nodes[k];
      prefix += inst.weight(v);
      if (k == 1) {
        anchor_prefix = prefix;
        current = k;
        ++next;
        continue;
      }
      if (next < anchors.size() && anchors[next] == k) {
        parent[v] = path.nodes[current];
        weight[v] = prefix - anchor_prefix;
        anchor_prefix = prefix;
        current = k;
        ++next;
      } else {
        parent[v] = path.nodes[current];
        weight[v] = 0;
        governor[v] = path.nodes[current];
        zeroed.push_back(v);
      }
    }
  }
  std::sort(zeroed.begin(), zeroed.end());

  std::vector<NodeId> node_map(n);
  for (NodeId v = 0; v < n; ++v) node_map[v] = v;
  TreeInstance reduced(inst.capacity(), std::move(parent), std::move(weight), inst.demands());
  return {inst, std::move(reduced), std::move(node_map), std::move(pd), std::move(anchor_ids),
          std::move(zeroed), params};
}

Solution lift_solution(const ReducedTree& rt, const Solution& sol) {
  auto rep = check_feasible(rt.tree, sol);
  if (!rep.ok()) {
    throw InstanceError("solution is not feasible on the reduced tree: " + rep.violations[0].detail);
  }
  std::vector<Tour> tours;
  tours.reserve(sol.tours.size());
  for (const auto& t : sol.tours) {
    Tour lifted;
    for (const auto& [v, k] : t.pickups) lifted.pickups[v] += k;
    tours.push_back(std::move(lifted));
  }
  return make_solution(rt.original, std::move(tours));
}

Solution project_solution(const ReducedTree& rt, const Solution& sol) {
  std::vector<Tour> tours;
  tours.reserve(sol.tours.size());
  for (const auto& t : sol.tours) {
    Tour projected;
    for (const auto& [v, k] : t.pickups) projected.pickups[rt.node_map[v]] += k;
    tours.push_back(std::move(projected));
  }
  return make_solution(rt.tree, std::move(tours));
}

std::string save_node_map(const ReducedTree& rt) {
  std::string out;
  for (NodeId v = 0; v < static_cast<NodeId>(rt.node_map.size()); ++v) {
    out += "map " + std::to_string(v) + " " + std::to_string(rt.node_map[v]) + "\n";
  }
  return out;
}

}  // namespace cvrp
