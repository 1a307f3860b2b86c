#pragma once

// Solver-independent checks of solutions: feasibility, cost, ratios.

#include <optional>
#include <string>
#include <vector>

#include "cvrp/instance.hpp"

namespace cvrp {

struct Violation {
  enum class Kind { Capacity, Coverage, UnknownNode, NonPositivePickup, Cost };
  Kind kind;
  int tour = -1;      // -1 when not tied to one tour
  NodeId node = -1;   // -1 when not tied to one node
  std::string detail;
};

const char* to_string(Violation::Kind kind);

struct FeasibilityReport {
  std::vector<Violation> violations;
  Weight recomputed_cost = 0;
  Weight claimed_cost = 0;
  Tokens max_load = 0;

  bool ok() const { return violations.empty(); }
  std::string to_json() const;
};

/// Checks per-tour load, exact coverage and the claimed cost. The load limit
/// defaults to the instance capacity; bicriteria output is checked against a
/// larger `capacity_limit`.
FeasibilityReport check_feasible(const TreeInstance& inst, const Solution& sol,
                                 std::optional<Tokens> capacity_limit = std::nullopt);

struct RatioReport {
  Rational ratio;
  Weight cost = 0;
  Weight reference = 0;
  /// True when the oracle was requested but the instance was too large.
  bool fell_back = false;
  bool used_oracle = false;
};

enum class Reference { Oracle, LowerBound };

RatioReport ratio_report(const TreeInstance& inst, const Solution& sol, Reference ref,
                         Tokens oracle_max_tokens = 14);

}  // namespace cvrp
