#include "doctest.h"

#include "cvrp/baselines.hpp"
#include "cvrp/exact.hpp"
#include "cvrp/verification.hpp"
#include "support.hpp"

using namespace cvrp;
using testing::random_instance;

TEST_CASE("lower bound examples") {
  CHECK(flow_lower_bound(testing::star3()) == 6);
  CHECK(flow_lower_bound(TreeInstance(1, {kNoParent, 0}, {0, 5}, {0, 1})) == 10);
  CHECK(flow_lower_bound(testing::path_ruv()) == 6);
}

TEST_CASE("ITP on the star") {
  auto inst = testing::star3();
  auto s = itp_solve(inst);
  REQUIRE(s.tours.size() == 2);
  CHECK(s.tours[0] == Tour{{{1, 1}, {2, 1}}});
  CHECK(s.tours[1] == Tour{{{3, 1}}});
  CHECK(s.total_cost == 6);
}

TEST_CASE("ITP with a single block") {
  TreeInstance inst(10, {kNoParent, 0, 1, 0}, {0, 2, 3, 4}, {0, 0, 3, 2});
  auto s = itp_solve(inst);
  CHECK(s.tours.size() == 1);
  CHECK(s.total_cost == 2 * (2 + 3 + 4));
}

TEST_CASE("LB <= opt <= ITP") {
  auto rng = make_rng(7);
  for (int i = 0; i < 200; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 2, 10));
    auto inst = random_instance(rng, n, uniform_int(rng, 1, 4), uniform_int(rng, 0, 10));
    auto itp = itp_solve(inst);
    CHECK(check_feasible(inst, itp).ok());
    const Weight opt = solve_exact(inst).total_cost;
    CHECK(flow_lower_bound(inst) <= opt);
    CHECK(opt <= itp.total_cost);
    CHECK(save_solution(itp) == save_solution(itp_solve(inst)));
  }
}

TEST_CASE("LB under random feasible solutions") {
  auto rng = make_rng(9);
  for (int i = 0; i < 200; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 2, 12));
    auto inst = random_instance(rng, n, uniform_int(rng, 1, 5), uniform_int(rng, 0, 20));
    // throw each token into a random tour with room, opening tours as needed
    std::vector<Tour> tours;
    for (NodeId v = 0; v < n; ++v) {
      for (Tokens k = 0; k < inst.demand(v); ++k) {
        std::size_t pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(tours.size())));
        if (pick == tours.size() || tours[pick].load() == inst.capacity()) {
          tours.emplace_back();
          pick = tours.size() - 1;
        }
        tours[pick].pickups[v] += 1;
      }
    }
    auto sol = make_solution(inst, tours);
    REQUIRE(check_feasible(inst, sol).ok());
    CHECK(flow_lower_bound(inst) <= sol.total_cost);
  }
}
