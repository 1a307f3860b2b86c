#pragma once

// Threshold schedules, buckets of partial tours, and the randomized
// transformation of a solution into one with few partial-tour sizes per
// node (grouping, shift map, extra sampled tours, pad tokens).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvrp/instance.hpp"

namespace cvrp {

struct ThresholdSchedule {
  std::vector<Tokens> sigma;
  Rational eps;
  Tokens capacity = 1;

  int size() const { return static_cast<int>(sigma.size()); }
  /// Index i with sigma[i] <= size < sigma[i+1]; size must be in [1, Q].
  int bucket_of(Tokens size) const;
  /// Exclusive upper end of bucket i (Q+1 for the last one).
  Tokens upper(int i) const;
};

/// sigma_i = i up to ceil(1/eps), then ceil(sigma_{i-1} * (1+eps)),
/// clamped to Q and deduplicated.
ThresholdSchedule thresholds(Tokens capacity, const Rational& eps);

struct StructureParams {
  /// A bucket with at most `gamma` partial tours is small.
  std::int64_t gamma = 0;
  /// Number of groups in a big bucket.
  int groups = 1;
};

/// gamma = floor(log2(n)^3 / eps^2), g = ceil(2 log2(n) / eps^2).
StructureParams default_structure_params(int n, const Rational& eps);

struct BucketView {
  int bucket = 0;
  /// Tours with coverage in the bucket, ascending by (size, tour id).
  std::vector<int> tours;
  std::vector<Tokens> sizes;
  bool big = false;
  /// For big buckets: g groups of tour ids, -1 for padding empties.
  std::vector<std::vector<int>> groups;
  std::vector<Tokens> group_max;
};

/// Tokens each tour picks inside the subtree of v.
std::vector<Tokens> partial_coverage(const TreeInstance& inst, const Solution& sol, NodeId v);

std::vector<BucketView> bucket_partial_tours(const TreeInstance& inst, const Solution& sol, NodeId v,
                                             const ThresholdSchedule& schedule,
                                             const StructureParams& params);

struct BucketShape {
  NodeId node = 0;
  int bucket = 0;
  std::int64_t tours = 0;
  std::int64_t distinct_sizes = 0;
  bool big = false;
  bool violation = false;
};

struct ComplexityReport {
  std::vector<BucketShape> buckets;
  std::int64_t violations = 0;
  std::int64_t max_distinct = 0;
  bool ok() const { return violations == 0; }
};

/// Per (node, bucket): tour count and distinct sizes. A bucket with more
/// than gamma tours and more than g distinct sizes is a violation.
ComplexityReport profile_complexity(const TreeInstance& inst, const Solution& sol,
                                    const ThresholdSchedule& schedule, const StructureParams& params);

struct TransformParams {
  Rational eps{1, 2};
  StructureParams structure;
  /// Probability of sampling each tour as an extra tour.
  double sample_prob = 0.5;
};

/// Default structure params and sample_prob = eps.
TransformParams default_transform_params(int n, const Rational& eps);

/// Not enough sampled tours at a big bucket, or a repack that does not fit
/// two copies. Resampling with another seed may succeed.
class TransformRetry : public std::runtime_error {
 public:
  TransformRetry(const std::string& what, NodeId node, int bucket, Weight sampled_cost)
      : std::runtime_error(what), node(node), bucket(bucket), sampled_cost(sampled_cost) {}
  NodeId node;
  int bucket;
  Weight sampled_cost;
};

struct BigBucketRecord {
  NodeId node = 0;
  int bucket = 0;
  std::int64_t tours = 0;
  std::vector<Tokens> group_max;
  Tokens orphan_tokens = 0;
  Tokens pad_tokens = 0;
  int orphans = 0;
  int hosts = 0;
};

struct TransformReport {
  Weight cost_before = 0;
  Weight cost_after = 0;
  Weight sampled_cost = 0;
  int sampled_tours = 0;
  int copies_used = 0;
  int copies_dropped = 0;
  Tokens pad_tokens = 0;
  Tokens orphan_tokens = 0;
  std::vector<BigBucketRecord> big_buckets;
  /// Edge-usage changes tracked while editing tours, copies included as
  /// full duplicates of their sampled tours.
  Weight increases = 0;
  Weight decreases = 0;
  Weight shortcut_savings = 0;
  ComplexityReport complexity;
  std::string to_json() const;
};

struct TransformResult {
  TreeInstance instance;
  Solution solution;
  /// Pad tokens per node; instance demand = original demand + pads.
  std::vector<Tokens> pads;
  TransformReport report;
};

/// `sol` must be feasible on `inst`. Deterministic in (params, seed).
TransformResult transform(const TreeInstance& inst, const Solution& sol, const TransformParams& params,
                          std::uint64_t seed);

/// Removes pad tokens from `sol` (a solution of inst + pads) so that it
/// covers `inst` exactly.
Solution strip_pads(const TreeInstance& inst, const std::vector<Tokens>& pads, const Solution& sol);

}  // namespace cvrp
