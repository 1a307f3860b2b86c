#pragma once

// Tree instances, tours and solutions for capacitated vehicle routing on
// rooted edge-weighted trees, plus the preprocessing reductions.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cvrp {

using NodeId = int;
using Weight = std::int64_t;
using Tokens = std::int64_t;

inline constexpr NodeId kDepot = 0;
inline constexpr NodeId kNoParent = -1;

/// Raised for malformed input or violated instance invariants.
class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rooted tree with integer edge weights, per-node token counts and a
/// vehicle capacity. Node 0 is the depot. Immutable once constructed.
class TreeInstance {
 public:
  /// `parent[0]` must be kNoParent; `weight[v]` is the weight of the edge
  /// (parent[v], v) and is ignored for the depot.
  TreeInstance(Tokens capacity, std::vector<NodeId> parent,
               std::vector<Weight> weight, std::vector<Tokens> demand);

  int size() const { return static_cast<int>(parent_.size()); }
  Tokens capacity() const { return capacity_; }
  NodeId parent(NodeId v) const { return parent_[v]; }
  Weight weight(NodeId v) const { return weight_[v]; }
  Tokens demand(NodeId v) const { return demand_[v]; }
  std::span<const NodeId> children(NodeId v) const;
  int depth(NodeId v) const { return depth_[v]; }
  Weight dist(NodeId v) const { return dist_[v]; }
  /// Nodes in DFS preorder, children visited in ascending id.
  std::span<const NodeId> preorder() const { return preorder_; }
  /// Number of nodes in the subtree rooted at v.
  int subtree_size(NodeId v) const { return subtree_size_[v]; }
  /// Maximum depth counted in edges.
  int height() const { return height_; }
  Tokens total_demand() const { return total_demand_; }
  /// Tokens in the subtree rooted at v.
  Tokens subtree_demand(NodeId v) const { return subtree_demand_[v]; }
  bool is_ancestor(NodeId a, NodeId v) const;

  const std::vector<NodeId>& parents() const { return parent_; }
  const std::vector<Weight>& weights() const { return weight_; }
  const std::vector<Tokens>& demands() const { return demand_; }

  TreeInstance with_demands(std::vector<Tokens> demand) const;
  TreeInstance with_capacity(Tokens capacity) const;

  friend bool operator==(const TreeInstance& a, const TreeInstance& b) {
    return a.capacity_ == b.capacity_ && a.parent_ == b.parent_ &&
           a.weight_ == b.weight_ && a.demand_ == b.demand_;
  }

 private:
  Tokens capacity_;
  std::vector<NodeId> parent_;
  std::vector<Weight> weight_;
  std::vector<Tokens> demand_;
  std::vector<NodeId> child_list_;
  std::vector<int> child_begin_;
  std::vector<int> depth_;
  std::vector<Weight> dist_;
  std::vector<NodeId> preorder_;
  std::vector<int> subtree_size_;
  std::vector<int> tin_;
  std::vector<int> tout_;
  std::vector<Tokens> subtree_demand_;
  int height_ = 0;
  Tokens total_demand_ = 0;
};

/// One vehicle route, stored as the tokens it picks per node.
struct Tour {
  std::map<NodeId, Tokens> pickups;

  Tokens load() const;
  friend auto operator<=>(const Tour&, const Tour&) = default;
};

struct Solution {
  std::vector<Tour> tours;
  Weight total_cost = 0;
};

/// 2 x weight of the minimal subtree spanning the depot and the pickup nodes.
Weight tour_cost(const TreeInstance& inst, const Tour& tour);
Weight solution_cost(const TreeInstance& inst, const Solution& sol);
/// Builds a solution from tours, computing the total cost. Empty tours are
/// dropped.
Solution make_solution(const TreeInstance& inst, std::vector<Tour> tours);
/// Tokens delivered per node.
std::vector<Tokens> covered(const TreeInstance& inst, const Solution& sol);
/// Sorts tours into the canonical order used for encoding and tie-breaking.
Solution canonical(Solution sol);
/// Concatenation of two solutions on the same instance.
Solution combine(const TreeInstance& inst, const Solution& a, const Solution& b);

// ---- file formats ----------------------------------------------------------

TreeInstance load_instance(std::string_view text);
std::string save_instance(const TreeInstance& inst);
/// Parses the tour lines and the claimed cost; the cost is not recomputed.
Solution load_solution(std::string_view text);
std::string save_solution(const Solution& sol);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// ---- preprocessing ---------------------------------------------------------

struct NormalizedInstance {
  TreeInstance residual;
  Solution trivial_tours;
};

/// Peels full loads: while d(v) >= Q a dedicated tour picks Q tokens at v.
NormalizedInstance normalize_demands(const TreeInstance& inst);

using Rational = boost::multiprecision::cpp_rational;

/// Parses "0.25", "1/4" or "3" into an exact rational.
Rational parse_rational(std::string_view text);

struct ScaledInstance {
  TreeInstance instance;
  /// Old node id for each node of `instance`.
  std::vector<NodeId> kept;
  /// Every surviving edge weight w became ceil(factor * max(w, floor_weight)).
  Rational factor;
  Rational floor_weight;
};

/// Rounds small edge weights up to eps*W/(4n^3), rescales so the smallest
/// weight is 1/eps and rounds up to integers. Edges heavier than `max_weight`
/// are removed together with the zero-demand subtrees below them.
ScaledInstance scale_weights(const TreeInstance& inst, const Rational& eps,
                             Weight max_weight);

/// Merges pairs of tours whose combined load fits, until at most one tour
/// carries Q/2 or fewer tokens. Never increases cost.
Solution merge_light_tours(const TreeInstance& inst, Solution sol);

}  // namespace cvrp
