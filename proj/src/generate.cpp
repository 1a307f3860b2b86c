#include "cvrp/generate.hpp"

#include <limits>
#include <stdexcept>

namespace cvrp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ (stream * 0xd1342543de82ef95ULL + 1));
}

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  // Rejection sampling keeps the result independent of libstdc++'s
  // distribution implementation.
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

Shape parse_shape(const std::string& s) {
  if (s == "random") return Shape::Random;
  if (s == "star") return Shape::Star;
  if (s == "path") return Shape::Path;
  if (s == "binary") return Shape::Binary;
  if (s == "parallel-paths") return Shape::ParallelPaths;
  throw std::invalid_argument("unknown shape '" + s + "'");
}

DemandModel parse_demand_model(const std::string& s) {
  if (s == "unit") return DemandModel::Unit;
  if (s == "uniform") return DemandModel::Uniform;
  if (s == "heavy") return DemandModel::Heavy;
  throw std::invalid_argument("unknown demand model '" + s + "'");
}

std::string to_string(Shape s) {
  switch (s) {
    case Shape::Random: return "random";
    case Shape::Star: return "star";
    case Shape::Path: return "path";
    case Shape::Binary: return "binary";
    case Shape::ParallelPaths: return "parallel-paths";
  }
  return "?";
}

std::string to_string(DemandModel d) {
  switch (d) {
    case DemandModel::Unit: return "unit";
    case DemandModel::Uniform: return "uniform";
    case DemandModel::Heavy: return "heavy";
  }
  return "?";
}

TreeInstance generate(const GenParams& p) {
  if (p.n < 2) throw std::invalid_argument("generator needs n >= 2");
  if (p.capacity < 1) throw std::invalid_argument("generator needs Q >= 1");
  if (p.shape == Shape::ParallelPaths && (p.paths < 1 || p.paths > p.n - 1)) {
    throw std::invalid_argument("parallel-paths needs 1 <= paths <= n-1");
  }
  auto rng = make_rng(p.seed);
  Weight wmax = p.max_weight;
  if (wmax == 0) wmax = (p.shape == Shape::Random || p.shape == Shape::ParallelPaths) ? 9 : 1;
  if (wmax < 1) throw std::invalid_argument("max weight must be positive");

  std::vector<NodeId> parent(p.n, kNoParent);
  std::vector<Weight> weight(p.n, 0);
  std::vector<Tokens> demand(p.n, 0);
  for (NodeId v = 1; v < p.n; ++v) {
    switch (p.shape) {
      case Shape::Random: parent[v] = static_cast<NodeId>(uniform_int(rng, 0, v - 1)); break;
      case Shape::Star: parent[v] = 0; break;
      case Shape::Path: parent[v] = v - 1; break;
      case Shape::Binary: parent[v] = (v - 1) / 2; break;
      case Shape::ParallelPaths: parent[v] = v <= p.paths ? 0 : v - p.paths; break;
    }
    weight[v] = wmax == 1 ? 1 : uniform_int(rng, 1, wmax);
  }
  const Tokens q = p.capacity;
  for (NodeId v = 1; v < p.n; ++v) {
    switch (p.demand) {
      case DemandModel::Unit: demand[v] = 1; break;
      case DemandModel::Uniform: demand[v] = uniform_int(rng, 1, std::max<Tokens>(1, q - 1)); break;
      case DemandModel::Heavy:
        demand[v] = uniform_int(rng, 0, 3) == 0 ? uniform_int(rng, q, 2 * q + 1)
                                                : uniform_int(rng, 1, std::max<Tokens>(1, q - 1));
        break;
    }
  }
  return TreeInstance(q, std::move(parent), std::move(weight), std::move(demand));
}

}  // namespace cvrp
