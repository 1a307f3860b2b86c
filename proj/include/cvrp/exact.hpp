#pragma once

// Exact optima for desk-scale instances. These are the reference oracles
// for every other solver, so they stay deliberately simple.

#include <stdexcept>

#include "cvrp/instance.hpp"

namespace cvrp {

struct ExactLimits {
  Tokens max_tokens = 14;
  int max_tours = 4;
};

/// The instance is too large for the requested exact method.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No solution exists under the requested restriction.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Memoized DP over residual per-node demand vectors. Among optimal
/// solutions, each step takes the lexicographically smallest tour that
/// contains the smallest-id node with remaining demand.
Solution solve_exact(const TreeInstance& inst, const ExactLimits& limits = {});

/// Plain recursive enumeration of all set partitions of the tokens.
/// Independent of solve_exact; capped at `max_tokens` (default 9).
Weight solve_exact_naive(const TreeInstance& inst, Tokens max_tokens = 9);

/// Optimum among solutions with at most `max_tours` tours, by a DP over
/// per-tour subtree coverage vectors combined child by child.
Solution solve_exact_k_tours(const TreeInstance& inst, int max_tours,
                             const ExactLimits& limits = {});

}  // namespace cvrp
