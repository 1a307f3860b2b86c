#include "cvrp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "cvrp/baselines.hpp"
#include "cvrp/exact.hpp"
#include "cvrp/height_reduction.hpp"
#include "cvrp/structure_transform.hpp"
#include "cvrp/verification.hpp"

namespace cvrp {

Algorithm parse_algorithm(const std::string& s) {
  if (s == "exact") return Algorithm::Exact;
  if (s == "itp") return Algorithm::Itp;
  if (s == "bicriteria") return Algorithm::Bicriteria;
  if (s == "qptas") return Algorithm::Qptas;
  if (s == "k-tours") return Algorithm::KTours;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Exact: return "exact";
    case Algorithm::Itp: return "itp";
    case Algorithm::Bicriteria: return "bicriteria";
    case Algorithm::Qptas: return "qptas";
    case Algorithm::KTours: return "k-tours";
  }
  return "?";
}

bool uses_eps(Algorithm a) { return a == Algorithm::Bicriteria || a == Algorithm::Qptas; }

namespace {

Tokens loose_capacity(Tokens q, const Rational& eps) {
  const Rational bound = Rational(q) * (1 + eps);
  using boost::multiprecision::cpp_int;
  cpp_int c = boost::multiprecision::numerator(bound) / boost::multiprecision::denominator(bound);
  if (Rational(c) < bound) c += 1;
  return static_cast<Tokens>(c);
}

DpResult structured(const TreeInstance& inst, const SolveOptions& opt) {
  auto p = default_structured_params(inst.size(), opt.eps);
  if (opt.gamma) p.structure.gamma = *opt.gamma;
  if (opt.groups) p.structure.groups = *opt.groups;
  p.state_budget = opt.state_budget;
  return solve_structured(inst, p);
}

}  // namespace

SolveOutcome run_algorithm(Algorithm algo, const TreeInstance& inst, const SolveOptions& opt) {
  SolveOutcome out;
  out.capacity_limit = inst.capacity();
  switch (algo) {
    case Algorithm::Exact:
      out.solution = solve_exact(inst, ExactLimits{opt.max_tokens, opt.max_tours});
      break;
    case Algorithm::Itp:
      out.solution = itp_solve(inst);
      break;
    case Algorithm::KTours:
      out.solution = solve_exact_k_tours(inst, opt.max_tours, ExactLimits{opt.max_tokens, opt.max_tours});
      break;
    case Algorithm::Bicriteria: {
      auto r = solve_bicriteria(inst, BicriteriaParams{opt.eps, opt.state_budget});
      out.solution = std::move(r.solution);
      out.stats = std::move(r.stats);
      out.capacity_limit = loose_capacity(inst.capacity(), opt.eps);
      break;
    }
    case Algorithm::Qptas: {
      if (!opt.reduce_height) {
        auto r = structured(inst, opt);
        out.solution = std::move(r.solution);
        out.stats = std::move(r.stats);
        break;
      }
      const auto rt = build_reduced_tree(inst, HeightParams{opt.eps});
      auto r = structured(rt.tree, opt);
      out.solution = lift_solution(rt, r.solution);
      out.stats = std::move(r.stats);
      break;
    }
  }
  return out;
}

// ---- config ------------------------------------------------------------------

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw std::invalid_argument("unknown key '" + k + "' in " + where);
  }
}

Rational rational_of(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return parse_rational(j.dump());
  throw std::invalid_argument("eps must be a number or a fraction string");
}

}  // namespace

BenchConfig parse_bench_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bench config: ") + e.what());
  }
  only_keys(j,
            {"seed", "families", "algorithms", "eps", "oracle_max_tokens", "gamma", "groups", "reduce_height",
             "state_budget", "max_tokens", "max_tours", "threads"},
            "bench config");
  BenchConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{1});
    for (const auto& f : j.at("families")) {
      only_keys(f, {"shape", "n", "capacity", "demand", "count", "max_weight", "paths"}, "family");
      InstanceFamily fam;
      fam.gen.shape = parse_shape(f.value("shape", std::string("random")));
      fam.gen.n = f.value("n", 8);
      fam.gen.capacity = f.value("capacity", Tokens{3});
      fam.gen.demand = parse_demand_model(f.value("demand", std::string("unit")));
      fam.gen.max_weight = f.value("max_weight", Weight{0});
      fam.gen.paths = f.value("paths", 12);
      fam.count = f.value("count", 1);
      if (fam.count < 0) throw std::invalid_argument("family count must be non-negative");
      c.families.push_back(fam);
    }
    for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    if (j.contains("eps")) {
      c.eps.clear();
      for (const auto& e : j.at("eps")) c.eps.push_back(rational_of(e));
    }
    for (const auto& e : c.eps) {
      if (e <= 0) throw std::invalid_argument("eps must be positive");
    }
    c.oracle_max_tokens = j.value("oracle_max_tokens", Tokens{14});
    if (j.contains("gamma")) c.solve.gamma = j.at("gamma").get<std::int64_t>();
    if (j.contains("groups")) c.solve.groups = j.at("groups").get<int>();
    c.solve.reduce_height = j.value("reduce_height", false);
    c.solve.state_budget = j.value("state_budget", c.solve.state_budget);
    c.solve.max_tokens = j.value("max_tokens", c.solve.max_tokens);
    c.solve.max_tours = j.value("max_tours", c.solve.max_tours);
    c.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bench config: ") + e.what());
  }
  if (c.algorithms.empty()) throw std::invalid_argument("bench config lists no algorithms");
  return c;
}

// ---- running -----------------------------------------------------------------

namespace {

struct Job {
  int instance;
  Algorithm algo;
  std::optional<Rational> eps;
};

struct Prepared {
  std::shared_ptr<const TreeInstance> inst;
  std::string shape;
  std::uint64_t seed;
  Weight reference;
  std::string kind;
};

void run_job(const Job& job, const Prepared& prep, const BenchConfig& config, BenchRow& row) {
  const auto& inst = *prep.inst;
  row.instance = job.instance;
  row.shape = prep.shape;
  row.n = inst.size();
  row.capacity = inst.capacity();
  row.tokens = inst.total_demand();
  row.seed = prep.seed;
  row.algorithm = job.algo;
  row.eps = job.eps;
  row.reference = prep.reference;
  row.reference_kind = prep.kind;
  row.inst = prep.inst;

  SolveOptions opt = config.solve;
  if (job.eps) opt.eps = *job.eps;
  const auto start = std::chrono::steady_clock::now();
  try {
    auto out = run_algorithm(job.algo, inst, opt);
    const auto rep = check_feasible(inst, out.solution, out.capacity_limit);
    row.status = rep.ok() ? "ok" : "infeasible";
    row.cost = rep.recomputed_cost;
    row.max_load = rep.max_load;
    row.tours = static_cast<std::int64_t>(out.solution.tours.size());
    if (out.stats) row.states = out.stats->total_states;
    if (row.reference > 0) {
      row.ratio = Rational(row.cost) / Rational(row.reference);
    } else {
      row.ratio = Rational(row.cost == 0 ? 1 : 0);
    }
    row.solution = std::move(out.solution);
  } catch (const SizeLimitError&) {
    row.status = "size_limit";
  } catch (const ResourceLimitError&) {
    row.status = "resource_limit";
  } catch (const TransformRetry&) {
    row.status = "retry";
  } catch (const std::exception&) {
    row.status = "error";
  }
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  std::vector<Prepared> instances;
  for (const auto& fam : config.families) {
    for (int k = 0; k < fam.count; ++k) {
      GenParams g = fam.gen;
      g.seed = derive_seed(config.seed, instances.size());
      auto inst = std::make_shared<const TreeInstance>(generate(g));
      Prepared p{inst, to_string(g.shape), g.seed, 0, ""};
      if (inst->total_demand() <= config.oracle_max_tokens) {
        p.reference = solve_exact(*inst, ExactLimits{config.oracle_max_tokens, 4}).total_cost;
        p.kind = "opt";
      } else {
        p.reference = flow_lower_bound(*inst);
        p.kind = "lower_bound";
      }
      instances.push_back(std::move(p));
    }
  }

  std::vector<Job> jobs;
  for (int i = 0; i < static_cast<int>(instances.size()); ++i) {
    for (Algorithm a : config.algorithms) {
      if (!uses_eps(a)) {
        jobs.push_back({i, a, std::nullopt});
        continue;
      }
      for (const auto& e : config.eps) jobs.push_back({i, a, e});
    }
  }

  std::vector<BenchRow> rows(jobs.size());
  int threads = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, static_cast<int>(jobs.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      run_job(jobs[k], instances[jobs[k].instance], config, rows[k]);
    }
  };
  std::vector<std::jthread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  return rows;
}

std::string format_ratio(const Rational& r) {
  using boost::multiprecision::cpp_int;
  const cpp_int num = boost::multiprecision::numerator(r);
  const cpp_int den = boost::multiprecision::denominator(r);
  const bool neg = num < 0;
  const cpp_int a = neg ? cpp_int(-num) : num;
  const cpp_int scaled = (a * 2000000 + den) / (2 * den);
  const cpp_int whole = scaled / 1000000;
  const cpp_int frac = scaled % 1000000;
  std::ostringstream os;
  os << (neg ? "-" : "") << whole << "." << std::setw(6) << std::setfill('0') << frac;
  return os.str();
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool timing) {
  std::ostringstream os;
  os << "instance,shape,n,capacity,tokens,seed,algorithm,eps,status,cost,reference,reference_kind,ratio,"
        "max_load,tours,states";
  if (timing) os << ",wall_ms";
  os << "\n";
  auto eps_text = [](const std::optional<Rational>& e) { return e ? e->str() : std::string(); };
  for (const auto& r : rows) {
    os << r.instance << "," << r.shape << "," << r.n << "," << r.capacity << "," << r.tokens << "," << r.seed
       << "," << to_string(r.algorithm) << "," << eps_text(r.eps) << "," << r.status << ",";
    if (r.status == "ok" || r.status == "infeasible") {
      os << r.cost << "," << r.reference << "," << r.reference_kind << "," << format_ratio(r.ratio) << ","
         << r.max_load << "," << r.tours << "," << r.states;
    } else {
      os << "," << r.reference << "," << r.reference_kind << ",,,,";
    }
    if (timing) os << "," << std::fixed << std::setprecision(3) << r.wall_ms;
    os << "\n";
  }

  // One summary row per (algorithm, eps), in first-appearance order.
  std::vector<std::pair<Algorithm, std::optional<Rational>>> keys;
  for (const auto& r : rows) {
    auto key = std::pair{r.algorithm, r.eps};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [algo, eps] : keys) {
    std::int64_t total = 0, ok = 0, states = 0;
    Weight cost = 0, reference = 0;
    Tokens load = 0;
    Rational ratio_sum{0};
    double wall = 0;
    for (const auto& r : rows) {
      if (r.algorithm != algo || r.eps != eps) continue;
      ++total;
      wall += r.wall_ms;
      if (r.status != "ok") continue;
      ++ok;
      cost += r.cost;
      reference += r.reference;
      ratio_sum += r.ratio;
      load = std::max(load, r.max_load);
      states = std::max(states, r.states);
    }
    os << "summary,,,,,," << to_string(algo) << "," << eps_text(eps) << ",ok " << ok << "/" << total << ","
       << cost << "," << reference << ",," << (ok > 0 ? format_ratio(ratio_sum / ok) : std::string()) << ","
       << load << ",," << states;
    if (timing) os << "," << std::fixed << std::setprecision(3) << wall;
    os << "\n";
  }
  return os.str();
}

}  // namespace cvrp
