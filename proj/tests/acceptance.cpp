// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cvrp/baselines.hpp"
#include "cvrp/bench.hpp"
#include "cvrp/exact.hpp"
#include "cvrp/generate.hpp"
#include "cvrp/height_reduction.hpp"
#include "cvrp/structure_transform.hpp"
#include "cvrp/structured_dp.hpp"
#include "cvrp/verification.hpp"
#include "support.hpp"

using namespace cvrp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::ostringstream time;
  time.precision(2);
  time << std::fixed << secs << "s";
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(limit_s)) + "s limit";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              time.str().c_str());
  std::fflush(stdout);
}

// Suite of criterion 2: n <= 10, tokens <= 12, Q in {2,3,4}.
std::vector<TreeInstance> sandwich_suite() {
  std::vector<TreeInstance> out;
  for (int i = 0; i < 200; ++i) {
    auto rng = make_rng(derive_seed(2002, i));
    const int n = static_cast<int>(uniform_int(rng, 2, 10));
    out.push_back(testing::random_instance(rng, n, uniform_int(rng, 2, 4), uniform_int(rng, 1, 12), 9));
  }
  return out;
}

TreeInstance stress_instance(int n, std::uint64_t seed) {
  GenParams g;
  g.shape = Shape::ParallelPaths;
  g.n = n;
  g.capacity = 3;
  g.seed = seed;
  return generate(g);
}

Tokens ceil_times(Tokens q, const Rational& f) {
  const Rational x = Rational(q) * f;
  using boost::multiprecision::cpp_int;
  cpp_int c = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
  if (Rational(c) < x) c += 1;
  return static_cast<Tokens>(c);
}

}  // namespace

int main() {
  const Rational half(1, 2);
  const auto suite = sandwich_suite();
  std::vector<Weight> opt(suite.size());

  criterion(1, "oracle cross-validation", 60, [] {
    int bad = 0;
    for (int i = 0; i < 300; ++i) {
      auto rng = make_rng(derive_seed(1001, i));
      const int n = static_cast<int>(uniform_int(rng, 2, 8));
      auto inst = testing::random_instance(rng, n, uniform_int(rng, 2, 4), uniform_int(rng, 0, 9), 9);
      const auto s = solve_exact(inst);
      if (!check_feasible(inst, s).ok() || s.total_cost != solve_exact_naive(inst)) ++bad;
    }
    return Outcome{bad == 0, "300 instances, " + std::to_string(bad) + " disagreements"};
  });

  criterion(2, "sandwich suite", 180, [&] {
    int bad = 0;
    Tokens worst_overload = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const auto& inst = suite[i];
      opt[i] = solve_exact(inst).total_cost;
      const Weight lb = flow_lower_bound(inst);
      const auto itp = itp_solve(inst);
      const auto bi = solve_bicriteria(inst, BicriteriaParams{half});
      const Tokens loose = ceil_times(inst.capacity(), 1 + half);
      const bool ok = lb <= opt[i] && opt[i] <= itp.total_cost && check_feasible(inst, itp).ok() &&
                      check_feasible(inst, bi.solution, loose).ok() && bi.solution.total_cost <= opt[i] &&
                      bi.stats.max_load <= loose;
      worst_overload = std::max(worst_overload, bi.stats.max_load - inst.capacity());
      bad += !ok;
    }
    return Outcome{bad == 0, "200 instances, " + std::to_string(bad) + " violations, largest bicriteria overload " +
                                 std::to_string(worst_overload)};
  });

  criterion(3, "structured DP optimal at generous params", 0, [&] {
    int bad = 0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const auto& inst = suite[i];
      StructuredParams p;
      p.eps = half;
      p.structure.gamma = inst.total_demand();
      p.structure.groups = 1;
      const auto r = solve_structured(inst, p);
      bad += !(check_feasible(inst, r.solution).ok() && r.solution.total_cost == opt[i]);
    }
    return Outcome{bad == 0, "200 instances, " + std::to_string(bad) + " deviations"};
  });

  criterion(4, "structured DP on parallel paths at tight params", 300, [&] {
    // opt <= cost holds for every feasible solution; the upper bound is
    // checked against the flow lower bound (which implies it for opt) and
    // against the exact optimum where the oracle applies.
    int bad = 0, runs = 0, exact_runs = 0;
    double worst = 0;
    for (int n = 13; n <= 30; ++n) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto inst = stress_instance(n, derive_seed(4004, n * 10 + seed));
        StructuredParams p;
        p.eps = half;
        p.structure = {2, 3};
        const auto r = solve_structured(inst, p);
        const auto rep = check_feasible(inst, r.solution);
        const Weight cost = rep.recomputed_cost;
        Weight ref = flow_lower_bound(inst);
        bool ok = rep.ok() && rep.max_load <= inst.capacity();
        if (inst.total_demand() <= 14) {
          const Weight o = solve_exact(inst).total_cost;
          ok = ok && o <= cost;
          ref = o;
          ++exact_runs;
        }
        ok = ok && Rational(cost) <= Rational(ref) * (1 + 5 * half);
        if (ref > 0) worst = std::max(worst, static_cast<double>(cost) / static_cast<double>(ref));
        bad += !ok;
        ++runs;
      }
    }
    std::ostringstream os;
    os << runs << " instances (" << exact_runs << " against opt, rest against the lower bound), " << bad
       << " violations, worst ratio " << worst;
    return Outcome{bad == 0, os.str()};
  });

  criterion(5, "height reduction sandwich", 0, [&] {
    int bad = 0, compressed = 0;
    for (int i = 0; i < 100; ++i) {
      auto rng = make_rng(derive_seed(5005, i));
      const int n = static_cast<int>(uniform_int(rng, 2, 10));
      auto inst = testing::random_instance(rng, n, uniform_int(rng, 2, 4), uniform_int(rng, 1, 12), 9);
      const Weight o = solve_exact(inst).total_cost;
      for (double delta : {1.0, 1e-9}) {
        HeightParams hp;
        hp.eps = half;
        hp.delta = delta;
        const auto rt = build_reduced_tree(inst, hp);
        compressed += !rt.zeroed.empty();
        const Weight o2 = solve_exact(rt.tree).total_cost;
        bad += !(o2 <= o && Rational(o) <= Rational(o2) * (1 + Rational(3) * half));
      }
    }
    int height_bad = 0, trees = 0;
    for (Shape shape : {Shape::Random, Shape::Star, Shape::Path, Shape::Binary, Shape::ParallelPaths}) {
      for (int n : {2, 10, 50, 200, 1000, 2000}) {
        GenParams g;
        g.shape = shape;
        g.n = n;
        g.seed = derive_seed(5006, n);
        g.paths = std::min(12, n - 1);
        const auto inst = generate(g);
        const auto rt = build_reduced_tree(inst, HeightParams{half});
        height_bad += rt.tree.height() > inst.height();
        ++trees;
      }
    }
    return Outcome{bad == 0 && height_bad == 0,
                   "200 reductions (" + std::to_string(compressed) + " compressing), " + std::to_string(bad) +
                       " sandwich violations; " + std::to_string(trees) + " trees, " +
                       std::to_string(height_bad) + " height increases"};
  });

  criterion(6, "consistency table equivalence", 30, [] {
    // Exhaustive over size multisets (sizes 1..6) with at most 4 tours in
    // total across z_v, z' and z'', and 0..6 extra tokens.
    std::vector<std::vector<Tokens>> sets;
    std::vector<Tokens> cur;
    std::function<void(Tokens)> gen = [&](Tokens from) {
      sets.push_back(cur);
      if (cur.size() == 4) return;
      for (Tokens s = from; s <= 6; ++s) {
        cur.push_back(s);
        gen(s);
        cur.pop_back();
      }
    };
    gen(1);
    auto brute = [](Tokens extra, const std::vector<Tokens>& zv, const std::vector<Tokens>& z1,
                    const std::vector<Tokens>& z2) {
      const int m = static_cast<int>(zv.size());
      std::vector<Tokens> left = zv;
      std::vector<char> u1(m, 0), u2(m, 0);
      std::function<bool(std::size_t, std::size_t)> rec = [&](std::size_t a, std::size_t b) -> bool {
        if (a < z1.size() || b < z2.size()) {
          const bool first = a < z1.size();
          auto& used = first ? u1 : u2;
          const Tokens t = first ? z1[a] : z2[b];
          for (int s = 0; s < m; ++s) {
            if (used[s]) continue;
            used[s] = 1;
            left[s] -= t;
            const bool ok = first ? rec(a + 1, b) : rec(a, b + 1);
            left[s] += t;
            used[s] = 0;
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
    };
    std::int64_t cases = 0, bad = 0;
    for (const auto& zv : sets) {
      for (const auto& z1 : sets) {
        if (zv.size() + z1.size() > 4) continue;
        for (const auto& z2 : sets) {
          if (zv.size() + z1.size() + z2.size() > 4) continue;
          for (Tokens extra = 0; extra <= 6; ++extra) {
            ++cases;
            bad += check_consistency(extra, zv, z1, z2) != brute(extra, zv, z1, z2);
          }
        }
      }
    }
    return Outcome{bad == 0, std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches"};
  });

  criterion(7, "threshold schedule properties", 0, [] {
    int bad = 0;
    auto rng = make_rng(7007);
    for (int i = 0; i < 50; ++i) {
      const Tokens q = i < 10 ? i + 1 : uniform_int(rng, 1, 1'000'000);
      const Rational eps(uniform_int(rng, 1, 20), uniform_int(rng, 1, 40));
      const auto s = thresholds(q, eps);
      bool ok = !s.sigma.empty() && s.sigma.front() == 1 && s.sigma.back() == q;
      for (int k = 1; k < s.size(); ++k) {
        ok = ok && s.sigma[k - 1] < s.sigma[k];
        ok = ok && s.sigma[k] <= ceil_times(s.sigma[k - 1], 1 + eps);
      }
      const Tokens prefix = std::min<Tokens>(q, ceil_times(1, 1 / eps));
      for (Tokens k = 1; k <= prefix && ok; ++k) ok = s.sigma[k - 1] == k;
      bad += !ok;
    }
    return Outcome{bad == 0, "50 (Q, eps) pairs, " + std::to_string(bad) + " violations"};
  });

  criterion(8, "structure transform audit", 0, [&] {
    const auto inst = stress_instance(25, 8008);
    const auto sol = itp_solve(inst);
    auto params = default_transform_params(inst.size(), half);
    params.structure = {2, 3};
    int ok_runs = 0, retries = 0, bad = 0;
    std::vector<double> sampled;
    for (int r = 0; r < 100; ++r) {
      const auto seed = derive_seed(derive_seed(8008, 0), 1000003 + r);
      try {
        const auto res = transform(inst, sol, params, seed);
        ++ok_runs;
        sampled.push_back(static_cast<double>(res.report.sampled_cost));
        const auto sched = thresholds(inst.capacity(), half);
        const auto cx = profile_complexity(res.instance, res.solution, sched, params.structure);
        const Weight before = solution_cost(inst, sol);
        const Weight after = solution_cost(res.instance, res.solution);
        const bool ok = check_feasible(res.instance, res.solution).ok() &&
                        check_feasible(inst, strip_pads(inst, res.pads, res.solution)).ok() && cx.ok() &&
                        after - before == 2 * (res.report.sampled_cost - res.report.shortcut_savings);
        bad += !ok;
      } catch (const TransformRetry& e) {
        ++retries;
        sampled.push_back(static_cast<double>(e.sampled_cost));
      }
    }
    double mean = 0;
    for (double x : sampled) mean += x;
    mean /= static_cast<double>(sampled.size());
    double var = 0;
    for (double x : sampled) var += (x - mean) * (x - mean);
    var /= static_cast<double>(sampled.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(sampled.size()));
    const double target = 0.5 * static_cast<double>(solution_cost(inst, sol));
    const bool mean_ok = std::abs(mean - target) <= 3 * se;
    std::ostringstream os;
    os << ok_runs << " successes, " << retries << " retries (rate " << retries / 100.0 << "), " << bad
       << " audit failures; mean sampled cost " << mean << " vs eps*cost " << target << " (3 SE = " << 3 * se
       << ")";
    return Outcome{bad == 0 && ok_runs > 0 && mean_ok, os.str()};
  });

  criterion(9, "bench determinism", 0, [] {
    BenchConfig c;
    c.seed = 9009;
    InstanceFamily f;
    f.gen.shape = Shape::Random;
    f.gen.n = 8;
    f.gen.capacity = 3;
    f.count = 200;
    c.families = {f};
    c.algorithms = {Algorithm::Exact, Algorithm::Itp, Algorithm::Bicriteria, Algorithm::Qptas};
    c.threads = 1;
    const auto a = bench_csv(run_bench(c), false);
    c.threads = 4;
    const auto rows = run_bench(c);
    const auto b = bench_csv(rows, false);
    const auto lines = std::count(a.begin(), a.end(), '\n');
    return Outcome{a == b && rows.size() == 800 && lines == 805,
                   std::to_string(rows.size()) + " rows, " + (a == b ? "identical" : "different") +
                       " across runs with 1 and 4 threads"};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
