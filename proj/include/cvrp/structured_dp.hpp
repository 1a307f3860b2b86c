#pragma once

// Profile dynamic programs over partial-tour sizes: the bicriteria DP with
// rounded-down sizes, and the structured DP whose states are per-bucket
// profiles (exact lists for small buckets, group maxima for big ones).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvrp/instance.hpp"
#include "cvrp/structure_transform.hpp"

namespace cvrp {

class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(const std::string& what, NodeId node) : std::runtime_error(what), node_(node) {}
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

class NodeProfile {
 public:
  struct Bucket {
    std::vector<Tokens> exact;   // small representation
    std::vector<Tokens> heads;   // big representation: group maxima
    std::vector<std::int64_t> counts;
    bool empty() const { return exact.empty() && heads.empty(); }
  };

  NodeProfile() = default;
  /// Throws std::invalid_argument if a big bucket has more than g sizes or
  /// a size lies outside [1, Q].
  static NodeProfile from_sizes(Tokens o, std::vector<Tokens> sizes, const ThresholdSchedule& schedule,
                                const StructureParams& params);

  Tokens tokens() const { return o_; }
  const std::vector<Bucket>& buckets() const { return buckets_; }
  /// All tour sizes, ascending.
  std::vector<Tokens> sizes() const;
  std::int64_t tours() const;
  std::string encode() const;

  friend bool operator==(const NodeProfile& a, const NodeProfile& b) { return a.encode() == b.encode(); }

 private:
  Tokens o_ = 0;
  std::vector<Bucket> buckets_;
};

/// Whether tours z1 and z2 can be absorbed into z_v (at most one from each
/// side per z_v tour, every z1/z2 tour used) with `extra` tokens making up
/// the differences exactly.
bool check_consistency(Tokens extra, std::vector<Tokens> zv, std::vector<Tokens> z1, std::vector<Tokens> z2);
bool check_consistency(Tokens extra, const NodeProfile& zv, const NodeProfile& z1, const NodeProfile& z2);

struct DpStats {
  /// Largest table seen at each node.
  std::vector<std::int64_t> states;
  std::int64_t total_states = 0;
  std::int64_t max_states = 0;
  /// Cost including pad-induced visits, before pads are stripped.
  Weight dp_cost = 0;
  Tokens pad_tokens = 0;
  Tokens max_load = 0;
  Rational eps_used{0};
};

struct DpResult {
  Solution solution;
  DpStats stats;
};

struct BicriteriaParams {
  Rational eps{1, 2};
  std::int64_t state_budget = 2'000'000;
};

/// Rounding parameter: min(eps^2 / log2(n)^2, ln(1+eps) / R), R the
/// largest sum of max(children, 1) over root-leaf paths.
Rational bicriteria_eps(const TreeInstance& inst, const Rational& eps);

/// Cost at most opt; loads at most (1+eps) Q.
DpResult solve_bicriteria(const TreeInstance& inst, const BicriteriaParams& params = {});

struct StructuredParams {
  Rational eps{1, 2};
  StructureParams structure;
  std::int64_t state_budget = 2'000'000;
  /// Re-check every kept transition with check_consistency.
  bool verify_transitions = false;
};

StructuredParams default_structured_params(int n, const Rational& eps);

/// Minimum cost over solutions whose partial tours fit the profile shape at
/// every node; pads are stripped from the returned tours.
DpResult solve_structured(const TreeInstance& inst, const StructuredParams& params);

}  // namespace cvrp
