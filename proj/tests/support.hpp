#pragma once

// Shared fixtures for the unit tests.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cvrp/generate.hpp"
#include "cvrp/instance.hpp"

namespace testing {

using namespace cvrp;

// Random tree on n nodes (parents below children ids), weights in
// [0, max_weight], `tokens` unit tokens dropped on random non-depot nodes.
inline TreeInstance random_instance(std::mt19937_64& rng, int n, Tokens capacity, Tokens tokens,
                                    Weight max_weight = 5) {
  std::vector<NodeId> parent(n, kNoParent);
  std::vector<Weight> weight(n, 0);
  std::vector<Tokens> demand(n, 0);
  for (NodeId v = 1; v < n; ++v) {
    parent[v] = static_cast<NodeId>(uniform_int(rng, 0, v - 1));
    weight[v] = uniform_int(rng, 0, max_weight);
  }
  for (Tokens k = 0; k < tokens; ++k) demand[uniform_int(rng, 1, n - 1)] += 1;
  return TreeInstance(capacity, parent, weight, demand);
}

// Same tree with node v renamed perm[v]; perm[0] must be 0.
inline TreeInstance relabel(const TreeInstance& inst, const std::vector<NodeId>& perm) {
  const int n = inst.size();
  std::vector<NodeId> parent(n, kNoParent);
  std::vector<Weight> weight(n, 0);
  std::vector<Tokens> demand(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    const NodeId nv = perm[v];
    demand[nv] = inst.demand(v);
    if (v != kDepot) {
      parent[nv] = perm[inst.parent(v)];
      weight[nv] = inst.weight(v);
    }
  }
  return TreeInstance(inst.capacity(), parent, weight, demand);
}

inline TreeInstance star3() { return TreeInstance(2, {kNoParent, 0, 0, 0}, {0, 1, 1, 1}, {0, 1, 1, 1}); }

// r - u - v with unit edges, d(u)=1, d(v)=2, Q=2.
inline TreeInstance path_ruv() { return TreeInstance(2, {kNoParent, 0, 1}, {0, 1, 1}, {0, 1, 2}); }

}  // namespace testing
