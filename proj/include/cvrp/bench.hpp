#pragma once

// Algorithm dispatch shared by the command line tool, and the benchmark
// harness that runs suites of generated instances into CSV.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cvrp/generate.hpp"
#include "cvrp/instance.hpp"
#include "cvrp/structured_dp.hpp"

namespace cvrp {

enum class Algorithm { Exact, Itp, Bicriteria, Qptas, KTours };

Algorithm parse_algorithm(const std::string& s);
std::string to_string(Algorithm a);
/// Whether the algorithm's output depends on eps.
bool uses_eps(Algorithm a);

struct SolveOptions {
  Rational eps{1, 2};
  std::optional<std::int64_t> gamma;
  std::optional<int> groups;
  bool reduce_height = false;
  std::int64_t state_budget = 2'000'000;
  Tokens max_tokens = 14;
  int max_tours = 4;
};

struct SolveOutcome {
  Solution solution;
  /// Load limit the output is checked against (above Q for bicriteria).
  Tokens capacity_limit = 0;
  std::optional<DpStats> stats;
};

/// Throws SizeLimitError / ResourceLimitError when the instance is too big
/// for the chosen method.
SolveOutcome run_algorithm(Algorithm algo, const TreeInstance& inst, const SolveOptions& opt);

struct InstanceFamily {
  GenParams gen;
  int count = 1;
};

struct BenchConfig {
  std::uint64_t seed = 1;
  std::vector<InstanceFamily> families;
  std::vector<Algorithm> algorithms;
  std::vector<Rational> eps{Rational(1, 2)};
  SolveOptions solve;
  /// Instances with at most this many tokens are compared to the exact
  /// optimum, larger ones to the flow lower bound.
  Tokens oracle_max_tokens = 14;
  int threads = 0;
};

/// Reads the JSON suite description; throws std::invalid_argument.
BenchConfig parse_bench_config(const std::string& json_text);

struct BenchRow {
  int instance = 0;
  std::string shape;
  int n = 0;
  Tokens capacity = 0;
  Tokens tokens = 0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::Exact;
  std::optional<Rational> eps;
  std::string status;
  Weight cost = 0;
  Weight reference = 0;
  std::string reference_kind;
  Rational ratio{0};
  Tokens max_load = 0;
  std::int64_t tours = 0;
  std::int64_t states = 0;
  double wall_ms = 0;
  std::shared_ptr<const TreeInstance> inst;
  Solution solution;
};

/// Rows ordered by (instance, algorithm, eps) regardless of thread count.
std::vector<BenchRow> run_bench(const BenchConfig& config);

std::string bench_csv(const std::vector<BenchRow>& rows, bool timing);

/// Decimal rendering with six fractional digits, rounded half up.
std::string format_ratio(const Rational& r);

}  // namespace cvrp
