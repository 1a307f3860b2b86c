// Command line front end: gen, solve, verify, bound, reduce, transform, bench.
// Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 resource limit.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvrp/baselines.hpp"
#include "cvrp/bench.hpp"
#include "cvrp/exact.hpp"
#include "cvrp/generate.hpp"
#include "cvrp/height_reduction.hpp"
#include "cvrp/instance.hpp"
#include "cvrp/structure_transform.hpp"
#include "cvrp/structured_dp.hpp"
#include "cvrp/verification.hpp"

using namespace cvrp;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;
constexpr int kResource = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

TreeInstance read_instance(const std::string& path) { return load_instance(read_file(path)); }

Rational eps_of(const std::string& text) {
  Rational e = parse_rational(text);
  if (e <= 0) throw UsageError("eps must be positive");
  return e;
}

// ---- gen ---------------------------------------------------------------------

struct GenArgs {
  std::string shape = "random", demand = "unit", out;
  int n = 8, paths = 12;
  Tokens capacity = 3;
  std::uint64_t seed = 1;
  Weight max_weight = 0;
};

int run_gen(const GenArgs& a) {
  GenParams p;
  p.shape = parse_shape(a.shape);
  p.demand = parse_demand_model(a.demand);
  p.n = a.n;
  p.capacity = a.capacity;
  p.seed = a.seed;
  p.max_weight = a.max_weight;
  p.paths = a.paths;
  emit(a.out, save_instance(generate(p)));
  return kOk;
}

// ---- solve -------------------------------------------------------------------

struct SolveArgs {
  std::string instance, algo = "exact", eps = "1/2", out;
  std::optional<std::int64_t> gamma;
  std::optional<int> groups;
  bool reduce_height = false, stats = false;
  std::int64_t budget = 2'000'000;
  Tokens max_tokens = 14;
  int max_tours = 4;
};

int run_solve(const SolveArgs& a) {
  const auto inst = read_instance(a.instance);
  SolveOptions opt;
  opt.eps = eps_of(a.eps);
  opt.gamma = a.gamma;
  opt.groups = a.groups;
  opt.reduce_height = a.reduce_height;
  opt.state_budget = a.budget;
  opt.max_tokens = a.max_tokens;
  opt.max_tours = a.max_tours;
  const auto out = run_algorithm(parse_algorithm(a.algo), inst, opt);
  const auto rep = check_feasible(inst, out.solution, out.capacity_limit);
  emit(a.out, save_solution(out.solution));
  if (a.stats) {
    nlohmann::json j = {{"algorithm", a.algo},
                        {"cost", rep.recomputed_cost},
                        {"tours", out.solution.tours.size()},
                        {"max_load", rep.max_load},
                        {"capacity_limit", out.capacity_limit},
                        {"feasible", rep.ok()}};
    if (out.stats) {
      j["total_states"] = out.stats->total_states;
      j["max_states"] = out.stats->max_states;
      j["dp_cost"] = out.stats->dp_cost;
      j["pad_tokens"] = out.stats->pad_tokens;
      j["eps_used"] = out.stats->eps_used.str();
    }
    std::cerr << j.dump() << "\n";
  }
  if (!rep.ok()) {
    std::cerr << "solver output failed verification: " << rep.to_json() << "\n";
    return kVerifyFailed;
  }
  return kOk;
}

// ---- verify / bound ----------------------------------------------------------

struct VerifyArgs {
  std::string instance, solution;
  std::optional<Tokens> capacity;
  bool json = false, ratio = false;
  Tokens max_tokens = 14;
};

int run_verify(const VerifyArgs& a) {
  const auto inst = read_instance(a.instance);
  const auto sol = load_solution(read_file(a.solution));
  const auto rep = check_feasible(inst, sol, a.capacity);
  std::optional<RatioReport> ratio;
  if (a.ratio && rep.ok()) ratio = ratio_report(inst, sol, Reference::Oracle, a.max_tokens);
  if (a.json) {
    auto j = nlohmann::json::parse(rep.to_json());
    if (ratio) {
      j["ratio"] = format_ratio(ratio->ratio);
      j["reference"] = ratio->reference;
      j["reference_kind"] = ratio->used_oracle ? "opt" : "lower_bound";
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << (rep.ok() ? "feasible" : "infeasible") << " cost " << rep.recomputed_cost << " claimed "
              << rep.claimed_cost << " max_load " << rep.max_load << "\n";
    for (const auto& v : rep.violations) {
      std::cout << "  " << to_string(v.kind) << " tour " << v.tour << " node " << v.node << ": " << v.detail
                << "\n";
    }
    if (ratio) {
      std::cout << "ratio " << format_ratio(ratio->ratio) << " against "
                << (ratio->used_oracle ? "opt " : "lower bound ") << ratio->reference << "\n";
    }
  }
  return rep.ok() ? kOk : kVerifyFailed;
}

int run_bound(const std::string& path) {
  std::cout << flow_lower_bound(read_instance(path)) << "\n";
  return kOk;
}

// ---- reduce ------------------------------------------------------------------

struct ReduceArgs {
  std::string instance, eps = "1/2", out, map;
  double delta = 1.0;
};

int run_reduce(const ReduceArgs& a) {
  HeightParams p;
  p.eps = eps_of(a.eps);
  p.delta = a.delta;
  const auto rt = build_reduced_tree(read_instance(a.instance), p);
  emit(a.out, save_instance(rt.tree));
  std::string map = a.map;
  if (map.empty() && !a.out.empty() && a.out != "-") map = a.out + ".map";
  if (!map.empty()) write_file(map, save_node_map(rt));
  std::cerr << "height " << rt.original.height() << " -> " << rt.tree.height() << ", compressed "
            << rt.zeroed.size() << " nodes\n";
  return kOk;
}

// ---- transform ---------------------------------------------------------------

struct TransformArgs {
  std::string instance, solution, eps = "1/2", out, out_instance;
  std::uint64_t seed = 1;
  int runs = 1;
  std::optional<std::int64_t> gamma;
  std::optional<int> groups;
  std::optional<double> sample_prob;
};

int run_transform(const TransformArgs& a) {
  const auto inst = read_instance(a.instance);
  const auto sol = load_solution(read_file(a.solution));
  if (!check_feasible(inst, sol).ok()) {
    std::cerr << "input solution is infeasible\n";
    return kVerifyFailed;
  }
  auto p = default_transform_params(inst.size(), eps_of(a.eps));
  if (a.gamma) p.structure.gamma = *a.gamma;
  if (a.groups) p.structure.groups = *a.groups;
  if (a.sample_prob) p.sample_prob = *a.sample_prob;
  bool written = false;
  for (int r = 0; r < a.runs; ++r) {
    const std::uint64_t seed = derive_seed(a.seed, 1000003 + static_cast<std::uint64_t>(r));
    nlohmann::json line = {{"run", r}, {"seed", seed}};
    try {
      auto res = transform(inst, sol, p, seed);
      line["status"] = "ok";
      line.update(nlohmann::json::parse(res.report.to_json()));
      line["feasible"] = check_feasible(res.instance, res.solution).ok();
      if (!written && (!a.out.empty() || !a.out_instance.empty())) {
        if (!a.out.empty()) write_file(a.out, save_solution(res.solution));
        if (!a.out_instance.empty()) write_file(a.out_instance, save_instance(res.instance));
        written = true;
      }
    } catch (const TransformRetry& e) {
      line["status"] = "retry";
      line["node"] = e.node;
      line["bucket"] = e.bucket;
      line["sampled_cost"] = e.sampled_cost;
      line["reason"] = e.what();
    }
    std::cout << line.dump() << "\n";
  }
  return kOk;
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
  std::string config, out, solutions;
  bool timing = false;
  int threads = 0;
};

int run_bench_cmd(const BenchArgs& a) {
  auto config = parse_bench_config(read_file(a.config));
  if (a.threads > 0) config.threads = a.threads;
  const auto rows = run_bench(config);
  emit(a.out, bench_csv(rows, a.timing));
  if (!a.solutions.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(a.solutions);
    int last = -1;
    for (const auto& r : rows) {
      if (r.instance != last) {
        write_file((fs::path(a.solutions) / ("instance_" + std::to_string(r.instance) + ".tree")).string(),
                   save_instance(*r.inst));
        last = r.instance;
      }
      if (r.status != "ok" && r.status != "infeasible") continue;
      std::string name = "instance_" + std::to_string(r.instance) + "_" + to_string(r.algorithm);
      if (r.eps) {
        std::string e = r.eps->str();
        std::replace(e.begin(), e.end(), '/', '_');
        name += "_eps" + e;
      }
      write_file((fs::path(a.solutions) / (name + ".sol")).string(), save_solution(r.solution));
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacitated vehicle routing on trees"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a seeded instance");
  g->add_option("--shape", gen.shape, "random, star, path, binary, parallel-paths");
  g->add_option("-n,--nodes", gen.n, "Node count including the depot");
  g->add_option("-Q,--capacity", gen.capacity);
  g->add_option("--demand", gen.demand, "unit, uniform, heavy");
  g->add_option("--seed", gen.seed);
  g->add_option("--max-weight", gen.max_weight, "0 picks the shape default");
  g->add_option("--paths", gen.paths, "Root paths for parallel-paths");
  g->add_option("-o,--out", gen.out);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve an instance");
  s->add_option("instance", solve.instance)->required();
  s->add_option("--algo", solve.algo, "exact, itp, bicriteria, qptas, k-tours");
  s->add_option("--eps", solve.eps);
  s->add_option("--gamma", solve.gamma);
  s->add_option("--groups", solve.groups);
  s->add_flag("--reduce-height", solve.reduce_height);
  s->add_option("--state-budget", solve.budget);
  s->add_option("--max-tokens", solve.max_tokens);
  s->add_option("--max-tours", solve.max_tours);
  s->add_flag("--stats", solve.stats, "Print a JSON summary to stderr");
  s->add_option("-o,--out", solve.out);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check a solution against an instance");
  v->add_option("instance", verify.instance)->required();
  v->add_option("solution", verify.solution)->required();
  v->add_option("--capacity-limit", verify.capacity, "Load limit instead of Q");
  v->add_flag("--json", verify.json);
  v->add_flag("--ratio", verify.ratio, "Compare to opt (or the lower bound)");
  v->add_option("--max-tokens", verify.max_tokens);

  std::string bound_path;
  auto* b = app.add_subcommand("bound", "Flow lower bound");
  b->add_option("instance", bound_path)->required();

  ReduceArgs reduce;
  auto* r = app.add_subcommand("reduce", "Height-reduced tree and node map");
  r->add_option("instance", reduce.instance)->required();
  r->add_option("--eps", reduce.eps);
  r->add_option("--delta", reduce.delta);
  r->add_option("-o,--out", reduce.out);
  r->add_option("--map", reduce.map, "Node map file (default: OUT.map)");

  TransformArgs tr;
  auto* t = app.add_subcommand("transform", "Structure transform of a solution");
  t->add_option("instance", tr.instance)->required();
  t->add_option("solution", tr.solution)->required();
  t->add_option("--eps", tr.eps);
  t->add_option("--seed", tr.seed);
  t->add_option("--runs", tr.runs)->check(CLI::PositiveNumber);
  t->add_option("--gamma", tr.gamma);
  t->add_option("--groups", tr.groups);
  t->add_option("--sample-prob", tr.sample_prob)->check(CLI::Range(0.0, 1.0));
  t->add_option("-o,--out", tr.out, "Transformed solution of the first successful run");
  t->add_option("--out-instance", tr.out_instance, "Instance with pad tokens");

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Run a benchmark suite");
  be->add_option("config", bench.config)->required();
  be->add_flag("--timing", bench.timing, "Add a wall_ms column");
  be->add_option("--threads", bench.threads);
  be->add_option("--solutions", bench.solutions, "Directory for instance and solution files");
  be->add_option("-o,--out", bench.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return run_gen(gen);
    if (*s) return run_solve(solve);
    if (*v) return run_verify(verify);
    if (*b) return run_bound(bound_path);
    if (*r) return run_reduce(reduce);
    if (*t) return run_transform(tr);
    if (*be) return run_bench_cmd(bench);
  } catch (const SizeLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InstanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
