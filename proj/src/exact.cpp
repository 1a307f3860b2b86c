#include "cvrp/exact.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_map>

namespace cvrp {

namespace {

constexpr Weight kInf = std::numeric_limits<Weight>::max() / 4;

// Mixed-radix encoding of residual demand vectors over the demand nodes.
struct ResidualSpace {
  std::vector<NodeId> nodes;
  std::vector<Tokens> demand;
  std::vector<std::int64_t> stride;
  std::int64_t states = 1;

  explicit ResidualSpace(const TreeInstance& inst) {
    for (NodeId v = 0; v < inst.size(); ++v) {
      if (inst.demand(v) > 0) {
        nodes.push_back(v);
        demand.push_back(inst.demand(v));
      }
    }
    for (Tokens d : demand) {
      stride.push_back(states);
      states *= d + 1;
    }
  }

  int size() const { return static_cast<int>(nodes.size()); }
  Tokens digit(std::int64_t state, int i) const { return (state / stride[i]) % (demand[i] + 1); }
};

// Enumerates sub-vectors x <= r with x[first] >= 1 and |x| <= Q.
template <class F>
void for_each_group(const ResidualSpace& space, std::int64_t state, Tokens capacity, F&& visit) {
  const int m = space.size();
  std::vector<Tokens> r(m);
  int first = -1;
  for (int i = 0; i < m; ++i) {
    r[i] = space.digit(state, i);
    if (first < 0 && r[i] > 0) first = i;
  }
  if (first < 0) return;
  std::vector<Tokens> x(m, 0);
  auto rec = [&](auto&& self, int i, Tokens room, std::int64_t index, std::uint32_t mask) -> void {
    if (i == m) {
      visit(x, index, mask);
      return;
    }
    const Tokens lo = (i == first) ? 1 : 0;
    const Tokens hi = std::min(r[i], room);
    for (Tokens k = lo; k <= hi; ++k) {
      x[i] = k;
      self(self, i + 1, room - k, index + k * space.stride[i],
           k > 0 ? (mask | (1u << i)) : mask);
    }
    x[i] = 0;
  };
  rec(rec, first, capacity, 0, 0);
}

}  // namespace

Solution solve_exact(const TreeInstance& inst, const ExactLimits& limits) {
  if (inst.total_demand() > limits.max_tokens) {
    throw SizeLimitError("exact oracle: " + std::to_string(inst.total_demand()) +
                         " tokens exceed the limit of " + std::to_string(limits.max_tokens));
  }
  if (inst.total_demand() == 0) return make_solution(inst, {});

  const ResidualSpace space(inst);
  const int m = space.size();
  const Tokens q = inst.capacity();

  std::vector<Weight> group_cost(std::size_t{1} << m, 0);
  for (std::uint32_t mask = 1; mask < group_cost.size(); ++mask) {
    Tour t;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) t.pickups[space.nodes[i]] = 1;
    }
    group_cost[mask] = tour_cost(inst, t);
  }

  std::vector<Weight> best(space.states, kInf);
  best[0] = 0;
  for (std::int64_t s = 1; s < space.states; ++s) {
    Weight b = kInf;
    for_each_group(space, s, q, [&](const std::vector<Tokens>&, std::int64_t index, std::uint32_t mask) {
      b = std::min(b, group_cost[mask] + best[s - index]);
    });
    best[s] = b;
  }

  std::vector<Tour> tours;
  std::int64_t s = space.states - 1;
  while (s > 0) {
    std::optional<Tour> pick;
    std::int64_t pick_index = 0;
    for_each_group(space, s, q, [&](const std::vector<Tokens>& x, std::int64_t index, std::uint32_t mask) {
      if (group_cost[mask] + best[s - index] != best[s]) return;
      Tour t;
      for (int i = 0; i < m; ++i) {
        if (x[i] > 0) t.pickups[space.nodes[i]] = x[i];
      }
      if (!pick || t < *pick) {
        pick = std::move(t);
        pick_index = index;
      }
    });
    tours.push_back(std::move(*pick));
    s -= pick_index;
  }
  Solution sol = make_solution(inst, std::move(tours));
  return canonical(std::move(sol));
}

Weight solve_exact_naive(const TreeInstance& inst, Tokens max_tokens) {
  if (inst.total_demand() > max_tokens) {
    throw SizeLimitError("naive enumerator: " + std::to_string(inst.total_demand()) +
                         " tokens exceed the limit of " + std::to_string(max_tokens));
  }
  std::vector<NodeId> token_node;
  for (NodeId v = 0; v < inst.size(); ++v) {
    for (Tokens k = 0; k < inst.demand(v); ++k) token_node.push_back(v);
  }
  const int t = static_cast<int>(token_node.size());
  if (t == 0) return 0;

  // Cost of a group: every edge with a group token strictly below it is
  // walked down and back once.
  const auto& order = inst.preorder();
  auto group_cost = [&](const std::vector<int>& members) {
    std::vector<char> below(inst.size(), 0);
    for (int tok : members) below[token_node[tok]] = 1;
    Weight cost = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      NodeId v = *it;
      if (v == kDepot || !below[v]) continue;
      cost += 2 * inst.weight(v);
      below[inst.parent(v)] = 1;
    }
    return cost;
  };

  std::vector<std::vector<int>> groups;
  Weight best = kInf;
  auto rec = [&](auto&& self, int tok) -> void {
    if (tok == t) {
      Weight total = 0;
      for (const auto& g : groups) total += group_cost(g);
      best = std::min(best, total);
      return;
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (static_cast<Tokens>(groups[i].size()) < inst.capacity()) {
        groups[i].push_back(tok);
        self(self, tok + 1);
        groups[i].pop_back();
      }
    }
    groups.push_back({tok});
    self(self, tok + 1);
    groups.pop_back();
  };
  rec(rec, 0);
  return best;
}

namespace {

// Per-tour coverage vectors with components in [0, Q], packed base Q+1.
struct CoverageCodec {
  int tours;
  Tokens base;
  std::int64_t encode(const std::vector<Tokens>& c) const {
    std::int64_t code = 0;
    for (int i = tours - 1; i >= 0; --i) code = code * base + c[i];
    return code;
  }
  std::vector<Tokens> decode(std::int64_t code) const {
    std::vector<Tokens> c(tours);
    for (int i = 0; i < tours; ++i) {
      c[i] = code % base;
      code /= base;
    }
    return c;
  }
};

struct Step {
  Weight cost;
  std::int64_t prev;
  std::int64_t other;  // child state, or packed local distribution
};

using Table = std::unordered_map<std::int64_t, Step>;

}  // namespace

Solution solve_exact_k_tours(const TreeInstance& inst, int max_tours, const ExactLimits& limits) {
  if (max_tours < 1) throw SizeLimitError("k-tours DP needs at least one tour");
  if (max_tours > limits.max_tours) {
    throw SizeLimitError("k-tours DP: " + std::to_string(max_tours) + " tours exceed the limit of " +
                         std::to_string(limits.max_tours));
  }
  const Tokens q = inst.capacity();
  if (inst.total_demand() > q * max_tours) {
    throw InfeasibleError("total demand " + std::to_string(inst.total_demand()) +
                          " cannot be served by " + std::to_string(max_tours) + " tours of capacity " +
                          std::to_string(q));
  }
  if (inst.total_demand() == 0) return make_solution(inst, {});

  const CoverageCodec codec{max_tours, q + 1};
  const int n = inst.size();
  // stages[v][j]: table after the first j children; the last entry is after
  // the local tokens and already includes the parent-edge term.
  std::vector<std::vector<Table>> stages(n);

  const auto& order = inst.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    auto& st = stages[v];
    st.push_back(Table{{0, Step{0, -1, -1}}});
    for (NodeId u : inst.children(v)) {
      const Table& prev = st.back();
      const Table& child = stages[u].back();
      Table next;
      for (const auto& [ps, pstep] : prev) {
        const auto pc = codec.decode(ps);
        for (const auto& [cs, cstep] : child) {
          const auto cc = codec.decode(cs);
          std::vector<Tokens> sum(max_tours);
          bool ok = true;
          for (int i = 0; i < max_tours && ok; ++i) {
            sum[i] = pc[i] + cc[i];
            ok = sum[i] <= q;
          }
          if (!ok) continue;
          const auto code = codec.encode(sum);
          const Weight cost = pstep.cost + cstep.cost;
          auto found = next.find(code);
          if (found == next.end() || cost < found->second.cost) next[code] = Step{cost, ps, cs};
        }
      }
      st.push_back(std::move(next));
    }
    // Local tokens split among the tours, then the parent edge.
    const Tokens d = inst.demand(v);
    const Table& prev = st.back();
    Table local;
    for (const auto& [ps, pstep] : prev) {
      auto c = codec.decode(ps);
      std::vector<Tokens> x(max_tours, 0);
      auto rec = [&](auto&& self, int i, Tokens left) -> void {
        if (i == max_tours - 1) {
          if (c[i] + left > q) return;
          x[i] = left;
          std::vector<Tokens> sum(max_tours);
          int used = 0;
          for (int k = 0; k < max_tours; ++k) {
            sum[k] = c[k] + x[k];
            used += sum[k] > 0;
          }
          const Weight cost = pstep.cost + 2 * inst.weight(v) * used;
          const auto code = codec.encode(sum);
          auto found = local.find(code);
          if (found == local.end() || cost < found->second.cost) {
            local[code] = Step{cost, ps, codec.encode(x)};
          }
          x[i] = 0;
          return;
        }
        for (Tokens k = 0; k <= left && c[i] + k <= q; ++k) {
          x[i] = k;
          self(self, i + 1, left - k);
        }
        x[i] = 0;
      };
      rec(rec, 0, d);
    }
    st.push_back(std::move(local));
  }

  const Table& root = stages[kDepot].back();
  std::int64_t best_code = -1;
  Weight best_cost = kInf;
  for (const auto& [code, step] : root) {
    auto c = codec.decode(code);
    Tokens total = 0;
    for (Tokens k : c) total += k;
    if (total != inst.total_demand()) continue;
    if (step.cost < best_cost || (step.cost == best_cost && code < best_code)) {
      best_cost = step.cost;
      best_code = code;
    }
  }

  std::vector<Tour> tours(max_tours);
  auto backtrack = [&](auto&& self, NodeId v, std::int64_t code) -> void {
    const auto& st = stages[v];
    const Step& loc = st.back().at(code);
    const auto x = codec.decode(loc.other);
    for (int i = 0; i < max_tours; ++i) {
      if (x[i] > 0) tours[i].pickups[v] += x[i];
    }
    std::int64_t cur = loc.prev;
    const auto kids = inst.children(v);
    for (int j = static_cast<int>(kids.size()); j >= 1; --j) {
      const Step& s = st[j].at(cur);
      self(self, kids[j - 1], s.other);
      cur = s.prev;
    }
  };
  backtrack(backtrack, kDepot, best_code);
  return canonical(make_solution(inst, std::move(tours)));
}

}  // namespace cvrp
