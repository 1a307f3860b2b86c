#pragma once

#include "cvrp/instance.hpp"

namespace cvrp {

/// Sum over edges of 2 * w(e) * ceil(D_e / Q), D_e = tokens strictly below e.
/// Never exceeds the optimum.
Weight flow_lower_bound(const TreeInstance& inst);

/// Iterated tour partitioning: tokens in DFS order (children ascending) are
/// cut into consecutive blocks of exactly Q tokens, one tour per block.
Solution itp_solve(const TreeInstance& inst);

}  // namespace cvrp
