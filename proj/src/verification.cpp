#include "cvrp/verification.hpp"

#include "json.hpp"

#include "cvrp/baselines.hpp"
#include "cvrp/exact.hpp"

namespace cvrp {

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Capacity: return "capacity";
    case Violation::Kind::Coverage: return "coverage";
    case Violation::Kind::UnknownNode: return "unknown-node";
    case Violation::Kind::NonPositivePickup: return "non-positive-pickup";
    case Violation::Kind::Cost: return "cost";
  }
  return "?";
}

std::string FeasibilityReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok();
  j["recomputed_cost"] = recomputed_cost;
  j["claimed_cost"] = claimed_cost;
  j["max_load"] = max_load;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : violations) {
    j["violations"].push_back(
        {{"kind", to_string(v.kind)}, {"tour", v.tour}, {"node", v.node}, {"detail", v.detail}});
  }
  return j.dump();
}

FeasibilityReport check_feasible(const TreeInstance& inst, const Solution& sol,
                                 std::optional<Tokens> capacity_limit) {
  const Tokens limit = capacity_limit.value_or(inst.capacity());
  const int n = inst.size();
  FeasibilityReport rep;
  rep.claimed_cost = sol.total_cost;

  std::vector<Tokens> delivered(n, 0);
  // Edge usage counted per tour by marking the root path of every pickup.
  std::vector<int> mark(n, -1);
  for (int t = 0; t < static_cast<int>(sol.tours.size()); ++t) {
    Tokens load = 0;
    for (const auto& [v, k] : sol.tours[t].pickups) {
      if (v < 0 || v >= n) {
        rep.violations.push_back({Violation::Kind::UnknownNode, t, v, "node id out of range"});
        continue;
      }
      if (k <= 0) {
        rep.violations.push_back(
            {Violation::Kind::NonPositivePickup, t, v, "pickup of " + std::to_string(k) + " tokens"});
        continue;
      }
      load += k;
      delivered[v] += k;
      for (NodeId u = v; u != kDepot && mark[u] != t; u = inst.parent(u)) {
        mark[u] = t;
        rep.recomputed_cost += 2 * inst.weight(u);
      }
    }
    rep.max_load = std::max(rep.max_load, load);
    if (load > limit) {
      rep.violations.push_back({Violation::Kind::Capacity, t, -1,
                                "load " + std::to_string(load) + " exceeds " + std::to_string(limit)});
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (delivered[v] != inst.demand(v)) {
      rep.violations.push_back({Violation::Kind::Coverage, -1, v,
                                "delivered " + std::to_string(delivered[v]) + " of " +
                                    std::to_string(inst.demand(v))});
    }
  }
  if (rep.recomputed_cost != sol.total_cost) {
    rep.violations.push_back({Violation::Kind::Cost, -1, -1,
                              "claimed " + std::to_string(sol.total_cost) + ", recomputed " +
                                  std::to_string(rep.recomputed_cost)});
  }
  return rep;
}

RatioReport ratio_report(const TreeInstance& inst, const Solution& sol, Reference ref,
                         Tokens oracle_max_tokens) {
  RatioReport rep;
  rep.cost = check_feasible(inst, sol).recomputed_cost;
  if (ref == Reference::Oracle) {
    if (inst.total_demand() <= oracle_max_tokens) {
      rep.reference = solve_exact(inst, {oracle_max_tokens, 4}).total_cost;
      rep.used_oracle = true;
    } else {
      rep.fell_back = true;
    }
  }
  if (!rep.used_oracle) rep.reference = flow_lower_bound(inst);
  if (rep.reference == 0) {
    rep.ratio = rep.cost == 0 ? Rational(1) : Rational(0);
  } else {
    rep.ratio = Rational(rep.cost, rep.reference);
  }
  return rep;
}

}  // namespace cvrp
