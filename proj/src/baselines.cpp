#include "cvrp/baselines.hpp"

namespace cvrp {

Weight flow_lower_bound(const TreeInstance& inst) {
  const Tokens q = inst.capacity();
  Weight bound = 0;
  for (NodeId v = 1; v < inst.size(); ++v) {
    const Tokens below = inst.subtree_demand(v);
    bound += 2 * inst.weight(v) * ((below + q - 1) / q);
  }
  return bound;
}

Solution itp_solve(const TreeInstance& inst) {
  const Tokens q = inst.capacity();
  std::vector<Tour> tours;
  Tour current;
  Tokens room = q;
  for (NodeId v : inst.preorder()) {
    Tokens left = inst.demand(v);
    while (left > 0) {
      const Tokens take = std::min(left, room);
      current.pickups[v] += take;
      left -= take;
      room -= take;
      if (room == 0) {
        tours.push_back(std::move(current));
        current = Tour{};
        room = q;
      }
    }
  }
  if (!current.pickups.empty()) tours.push_back(std::move(current));
  return make_solution(inst, std::move(tours));
}

}  // namespace cvrp
