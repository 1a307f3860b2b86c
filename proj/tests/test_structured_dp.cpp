#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cvrp/baselines.hpp"
#include "cvrp/exact.hpp"
#include "cvrp/generate.hpp"
#include "cvrp/structured_dp.hpp"
#include "cvrp/verification.hpp"
#include "support.hpp"

using namespace cvrp;
using testing::random_instance;
using Sizes = std::vector<Tokens>;

namespace {

// Tries every injective map of z1 and of z2 into the slots of zv.
bool brute_consistent(Tokens extra, const std::vector<Tokens>& zv, const std::vector<Tokens>& z1,
                      const std::vector<Tokens>& z2) {
  const int m = static_cast<int>(zv.size());
  std::vector<Tokens> left = zv;
  std::vector<char> used1(m, 0), used2(m, 0);
  std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t a, std::size_t b) -> bool {
    if (a < z1.size()) {
      for (int s = 0; s < m; ++s) {
        if (used1[s]) continue;
        used1[s] = 1;
        left[s] -= z1[a];
        const bool ok = rec(a + 1, b);
        left[s] += z1[a];
        used1[s] = 0;
        if (ok) return true;
      }
      return false;
    }
    if (b < z2.size()) {
      for (int s = 0; s < m; ++s) {
        if (used2[s]) continue;
        used2[s] = 1;
        left[s] -= z2[b];
        const bool ok = rec(a, b + 1);
        left[s] += z2[b];
        used2[s] = 0;
        if (ok) return true;
      }
      return false;
    }
    Tokens sum = 0;
    for (Tokens x : left) {
      if (x < 0) return false;
      sum += x;
    }
    return sum == extra;
  };
  return rec(0, 0);
}

std::vector<std::vector<Tokens>> multisets(int max_count, Tokens max_size) {
  std::vector<std::vector<Tokens>> out;
  std::vector<Tokens> cur;
  std::function<void(Tokens)> rec = [&](Tokens from) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == max_count) return;
    for (Tokens s = from; s <= max_size; ++s) {
      cur.push_back(s);
      rec(s);
      cur.pop_back();
    }
  };
  rec(1);
  return out;
}

StructuredParams generous(const Rational& eps = Rational(1, 2)) {
  StructuredParams p;
  p.eps = eps;
  p.structure.gamma = 1000;
  p.structure.groups = 1;
  return p;
}

Tokens max_load(const Solution& s) {
  Tokens m = 0;
  for (const auto& t : s.tours) m = std::max(m, t.load());
  return m;
}

}  // namespace

TEST_CASE("consistency examples") {
  CHECK(check_consistency(0, Sizes{}, Sizes{}, Sizes{}));
  CHECK(check_consistency(1, {5}, {2}, {2}));
  CHECK_FALSE(check_consistency(0, {5}, {2}, {2}));
  CHECK_FALSE(check_consistency(1, Sizes{}, Sizes{}, Sizes{}));
  // two tours from the same side cannot share a parent tour
  CHECK_FALSE(check_consistency(0, {4}, {2, 2}, {}));
  CHECK(check_consistency(0, {2, 2}, {2, 2}, {}));
  CHECK(check_consistency(3, {1, 2}, {}, {}));
}

TEST_CASE("consistency against the brute-force matcher") {
  const auto sets = multisets(4, 6);
  std::int64_t cases = 0, positives = 0;
  for (const auto& zv : sets) {
    for (const auto& z1 : sets) {
      if (zv.size() + z1.size() > 4) continue;
      for (const auto& z2 : sets) {
        if (zv.size() + z1.size() + z2.size() > 4) continue;
        for (Tokens extra = 0; extra <= 6; ++extra) {
          const bool want = brute_consistent(extra, zv, z1, z2);
          CHECK(check_consistency(extra, zv, z1, z2) == want);
          ++cases;
          positives += want;
        }
      }
    }
  }
  MESSAGE("consistency cases " << cases << ", consistent " << positives);
  CHECK(positives > 0);
}

TEST_CASE("node profiles") {
  auto sched = thresholds(12, Rational(1));  // 1 2 4 8 12
  StructureParams sp{2, 2};
  auto p = NodeProfile::from_sizes(20, {9, 1, 3, 9, 11, 2}, sched, sp);
  CHECK(p.tours() == 6);
  CHECK(p.sizes() == std::vector<Tokens>{1, 2, 3, 9, 9, 11});
  CHECK(p.buckets()[3].heads == std::vector<Tokens>{9, 11});
  CHECK(p.buckets()[3].counts == std::vector<std::int64_t>{2, 1});
  CHECK(p.buckets()[0].exact == std::vector<Tokens>{1});
  CHECK(p.encode() == "o20|0t,1|1t,2,3|3h,9x2,11x1");
  CHECK(p == NodeProfile::from_sizes(20, {11, 9, 9, 3, 2, 1}, sched, sp));
  CHECK_THROWS_AS(NodeProfile::from_sizes(20, {8, 9, 10}, sched, sp), std::invalid_argument);
  CHECK_THROWS_AS(NodeProfile::from_sizes(20, {13}, sched, sp), std::invalid_argument);
  CHECK(check_consistency(3, p, NodeProfile::from_sizes(0, {1, 2, 9, 9}, sched, sp),
                          NodeProfile::from_sizes(0, {2, 9}, sched, sp)));
}

TEST_CASE("single demand node") {
  TreeInstance inst(4, {kNoParent, 0, 1}, {0, 3, 2}, {0, 0, 3});
  auto r = solve_structured(inst, generous());
  CHECK(r.solution.total_cost == 10);
  CHECK(r.solution.tours.size() == 1);
  auto b = solve_bicriteria(inst);
  CHECK(b.solution.total_cost == 10);
  CHECK(b.stats.max_load == 3);
}

TEST_CASE("star and path examples") {
  auto star = testing::star3();
  CHECK(solve_structured(star, generous()).solution.total_cost == 6);
  CHECK(solve_bicriteria(star).solution.total_cost <= 6);
  auto ruv = testing::path_ruv();
  CHECK(solve_structured(ruv, generous()).solution.total_cost == 6);
}

TEST_CASE("heavy demands are peeled into trivial tours") {
  TreeInstance inst(3, {kNoParent, 0, 0}, {0, 2, 5}, {0, 7, 1});
  auto r = solve_structured(inst, generous());
  CHECK(check_feasible(inst, r.solution).ok());
  CHECK(r.solution.total_cost == solve_exact(inst).total_cost);
}

TEST_CASE("structured DP equals the exact optimum at generous params") {
  auto rng = make_rng(404);
  for (int i = 0; i < 120; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 2, 8));
    auto inst = random_instance(rng, n, uniform_int(rng, 1, 4), uniform_int(rng, 0, 10));
    auto p = generous();
    p.verify_transitions = true;
    auto r = solve_structured(inst, p);
    const auto rep = check_feasible(inst, r.solution);
    CHECK(rep.ok());
    CHECK(r.solution.total_cost == solve_exact(inst).total_cost);
    CHECK(r.stats.dp_cost == r.solution.total_cost);
    CHECK(flow_lower_bound(inst) <= r.solution.total_cost);
  }
}

TEST_CASE("bicriteria DP is a relaxation with bounded overload") {
  auto rng = make_rng(505);
  for (int i = 0; i < 120; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 2, 10));
    const Tokens q = uniform_int(rng, 2, 4);
    auto inst = random_instance(rng, n, q, uniform_int(rng, 0, 12));
    auto r = solve_bicriteria(inst);
    const auto loose = static_cast<Tokens>(std::ceil(1.5 * static_cast<double>(q)));
    CHECK(check_feasible(inst, r.solution, loose).ok());
    CHECK(r.solution.total_cost <= solve_exact(inst).total_cost);
    CHECK(r.stats.max_load <= loose);
  }
}

TEST_CASE("bicriteria is exact when all thresholds are integers") {
  auto rng = make_rng(606);
  int exact_cases = 0;
  for (int i = 0; i < 100; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 2, 8));
    const Tokens q = uniform_int(rng, 2, 4);
    auto inst = random_instance(rng, n, q, uniform_int(rng, 0, 10));
    const Rational e = bicriteria_eps(normalize_demands(inst).residual, Rational(1, 2));
    if (Rational(q) > 1 / e) continue;
    ++exact_cases;
    auto r = solve_bicriteria(inst);
    CHECK(r.solution.total_cost == solve_exact(inst).total_cost);
    CHECK(r.stats.max_load <= q);
  }
  CHECK(exact_cases > 50);
}

TEST_CASE("bicriteria with a coarse eps") {
  TreeInstance inst(10, {kNoParent, 0, 0, 0}, {0, 4, 4, 4}, {0, 4, 4, 4});
  auto b = solve_bicriteria(inst, BicriteriaParams{Rational(1)});
  CHECK(b.solution.total_cost <= solve_exact(inst).total_cost);
  CHECK(b.stats.max_load <= 20);
  CHECK(b.stats.eps_used <= Rational(1));
}

TEST_CASE("tight params on parallel paths") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    GenParams g;
    g.shape = Shape::ParallelPaths;
    g.n = static_cast<int>(13 + seed);
    g.capacity = 3;
    g.seed = seed;
    auto inst = generate(g);
    StructuredParams p;
    p.eps = Rational(1, 2);
    p.structure = {2, 3};
    auto r = solve_structured(inst, p);
    CHECK(check_feasible(inst, r.solution).ok());
    if (inst.total_demand() <= 14) {
      const Weight opt = solve_exact(inst).total_cost;
      CHECK(opt <= r.solution.total_cost);
      CHECK(r.solution.total_cost * 2 <= 7 * opt);
    }
  }
}

TEST_CASE("monotone in gamma and g") {
  auto rng = make_rng(707);
  for (int i = 0; i < 40; ++i) {
    const int n = static_cast<int>(uniform_int(rng, 3, 9));
    auto inst = random_instance(rng, n, 12, uniform_int(rng, 6, 14), 9);
    Weight last = -1;
    for (auto [gamma, groups] : {std::pair{0, 1}, {1, 1}, {1, 2}, {3, 2}, {3, 4}, {50, 4}}) {
      StructuredParams p;
      p.eps = Rational(1);
      p.structure = {gamma, groups};
      p.verify_transitions = true;
      auto r = solve_structured(inst, p);
      CHECK(check_feasible(inst, r.solution).ok());
      if (last >= 0) CHECK(r.stats.dp_cost <= last);
      last = r.stats.dp_cost;
    }
    CHECK(last == solve_exact(inst).total_cost);
  }
}

TEST_CASE("state budget names the node") {
  auto rng = make_rng(808);
  auto inst = random_instance(rng, 9, 6, 14);
  auto p = generous();
  p.state_budget = 3;
  try {
    solve_structured(inst, p);
    FAIL("expected a resource error");
  } catch (const ResourceLimitError& e) {
    CHECK(e.node() >= 0);
    CHECK(std::string(e.what()).find("node " + std::to_string(e.node())) != std::string::npos);
  }
}

TEST_CASE("outputs are deterministic") {
  auto rng = make_rng(909);
  auto inst = random_instance(rng, 8, 3, 10);
  auto a = solve_structured(inst, generous());
  auto b = solve_structured(inst, generous());
  CHECK(a.solution.tours == b.solution.tours);
  auto c = solve_bicriteria(inst);
  auto d = solve_bicriteria(inst);
  CHECK(c.solution.tours == d.solution.tours);
}
