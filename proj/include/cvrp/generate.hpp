#pragma once

// Seeded instance generators and the seed-splitting scheme.

#include <cstdint>
#include <random>
#include <string>

#include "cvrp/instance.hpp"

namespace cvrp {

/// splitmix64 step; the mixing function behind every derived seed.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` derived from `base`. Instance i of a suite uses
/// derive_seed(suite_seed, i); transform run r on it uses
/// derive_seed(derive_seed(suite_seed, i), 1000003 + r).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

std::mt19937_64 make_rng(std::uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng);

/// Uniform integer in [lo, hi].
std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi);

enum class Shape { Random, Star, Path, Binary, ParallelPaths };
enum class DemandModel { Unit, Uniform, Heavy };

Shape parse_shape(const std::string& s);
DemandModel parse_demand_model(const std::string& s);
std::string to_string(Shape s);
std::string to_string(DemandModel d);

struct GenParams {
  Shape shape = Shape::Random;
  int n = 8;
  Tokens capacity = 3;
  DemandModel demand = DemandModel::Unit;
  std::uint64_t seed = 1;
  /// Edge weights are drawn from [1, max_weight]; 0 picks the shape default
  /// (9 for random and parallel-paths, 1 otherwise).
  Weight max_weight = 0;
  /// Number of root paths for the parallel-paths shape.
  int paths = 12;
};

/// Deterministic in the parameters. Node ids follow construction order, so
/// every parent id is smaller than its child's.
TreeInstance generate(const GenParams& p);

}  // namespace cvrp
