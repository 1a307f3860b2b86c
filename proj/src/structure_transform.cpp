#include "cvrp/structure_transform.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "cvrp/generate.hpp"
#include "cvrp/verification.hpp"

namespace cvrp {

namespace {

std::int64_t ceil_rational(const Rational& x) {
  using boost::multiprecision::cpp_int;
  cpp_int q = boost::multiprecision::numerator(x) / boost::multiprecision::denominator(x);
  if (Rational(q) < x) q += 1;
  return static_cast<std::int64_t>(q);
}

}  // namespace

int ThresholdSchedule::bucket_of(Tokens size) const {
  auto it = std::upper_bound(sigma.begin(), sigma.end(), size);
  return static_cast<int>(it - sigma.begin()) - 1;
}

Tokens ThresholdSchedule::upper(int i) const {
  return i + 1 < size() ? sigma[i + 1] : capacity + 1;
}

ThresholdSchedule thresholds(Tokens capacity, const Rational& eps) {
  if (capacity < 1) throw std::invalid_argument("thresholds need Q >= 1");
  if (eps <= 0) throw std::invalid_argument("thresholds need eps > 0");
  ThresholdSchedule s;
  s.eps = eps;
  s.capacity = capacity;
  const std::int64_t prefix = ceil_rational(Rational(1) / eps);
  for (Tokens i = 1; i <= prefix && i <= capacity; ++i) s.sigma.push_back(i);
  while (s.sigma.back() < capacity) {
    const Tokens next = ceil_rational(Rational(s.sigma.back()) * (1 + eps));
    s.sigma.push_back(std::min(next, capacity));
  }
  return s;
}

StructureParams default_structure_params(int n, const Rational& eps) {
  const double lg = std::log2(static_cast<double>(std::max(n, 2)));
  const double e = eps.convert_to<double>();
  StructureParams p;
  p.gamma = static_cast<std::int64_t>(std::floor(lg * lg * lg / (e * e)));
  p.groups = static_cast<int>(std::ceil(2 * lg / (e * e)));
  return p;
}

TransformParams default_transform_params(int n, const Rational& eps) {
  TransformParams p;
  p.eps = eps;
  p.structure = default_structure_params(n, eps);
  p.sample_prob = eps.convert_to<double>();
  return p;
}

std::vector<Tokens> partial_coverage(const TreeInstance& inst, const Solution& sol, NodeId v) {
  std::vector<Tokens> cov(sol.tours.size(), 0);
  for (std::size_t t = 0; t < sol.tours.size(); ++t) {
    for (const auto& [u, k] : sol.tours[t].pickups) {
      if (inst.is_ancestor(v, u)) cov[t] += k;
    }
  }
  return cov;
}

namespace {

struct Slot {
  Tokens size = 0;
  int tour = -1;
};

// Ascending (size, id) entries padded at the front with empties to a
// multiple of g, cut into g consecutive groups.
std::vector<std::vector<Slot>> form_groups(std::vector<Slot> entries, int g) {
  std::sort(entries.begin(), entries.end(),
            [](const Slot& a, const Slot& b) { return std::tie(a.size, a.tour) < std::tie(b.size, b.tour); });
  const std::size_t per = (entries.size() + g - 1) / g;
  std::vector<Slot> padded(per * g - entries.size());
  padded.insert(padded.end(), entries.begin(), entries.end());
  std::vector<std::vector<Slot>> groups(g);
  for (int j = 0; j < g; ++j) {
    groups[j].assign(padded.begin() + j * per, padded.begin() + (j + 1) * per);
  }
  return groups;
}

Tokens group_max(const std::vector<Slot>& group) {
  Tokens m = 0;
  for (const auto& s : group) m = std::max(m, s.size);
  return m;
}

}  // namespace

std::vector<BucketView> bucket_partial_tours(const TreeInstance& inst, const Solution& sol, NodeId v,
                                             const ThresholdSchedule& schedule,
                                             const StructureParams& params) {
  const auto cov = partial_coverage(inst, sol, v);
  std::vector<std::vector<Slot>> by_bucket(schedule.size());
  for (std::size_t t = 0; t < cov.size(); ++t) {
    if (cov[t] > 0) by_bucket[schedule.bucket_of(cov[t])].push_back({cov[t], static_cast<int>(t)});
  }
  std::vector<BucketView> out;
  for (int i = 0; i < schedule.size(); ++i) {
    auto& entries = by_bucket[i];
    if (entries.empty()) continue;
    std::sort(entries.begin(), entries.end(),
              [](const Slot& a, const Slot& b) { return std::tie(a.size, a.tour) < std::tie(b.size, b.tour); });
    BucketView view;
    view.bucket = i;
    for (const auto& e : entries) {
      view.tours.push_back(e.tour);
      view.sizes.push_back(e.size);
    }
    view.big = static_cast<std::int64_t>(entries.size()) > params.gamma;
    if (view.big) {
      for (const auto& group : form_groups(entries, params.groups)) {
        std::vector<int> ids;
        for (const auto& s : group) ids.push_back(s.tour);
        view.groups.push_back(std::move(ids));
        view.group_max.push_back(group_max(group));
      }
    }
    out.push_back(std::move(view));
  }
  return out;
}

ComplexityReport profile_complexity(const TreeInstance& inst, const Solution& sol,
                                    const ThresholdSchedule& schedule, const StructureParams& params) {
  ComplexityReport rep;
  const int n = inst.size();
  // Coverage of every tour at every node, accumulated bottom-up.
  std::vector<std::vector<Tokens>> cov(sol.tours.size(), std::vector<Tokens>(n, 0));
  const auto order = inst.preorder();
  for (std::size_t t = 0; t < sol.tours.size(); ++t) {
    for (const auto& [u, k] : sol.tours[t].pickups) cov[t][u] += k;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (*it != kDepot) cov[t][inst.parent(*it)] += cov[t][*it];
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    std::vector<std::vector<Tokens>> sizes(schedule.size());
    for (std::size_t t = 0; t < sol.tours.size(); ++t) {
      if (cov[t][v] > 0) sizes[schedule.bucket_of(cov[t][v])].push_back(cov[t][v]);
    }
    for (int i = 0; i < schedule.size(); ++i) {
      if (sizes[i].empty()) continue;
      std::set<Tokens> distinct(sizes[i].begin(), sizes[i].end());
      BucketShape b;
      b.node = v;
      b.bucket = i;
      b.tours = static_cast<std::int64_t>(sizes[i].size());
      b.distinct_sizes = static_cast<std::int64_t>(distinct.size());
      b.big = b.tours > params.gamma;
      b.violation = b.big && b.distinct_sizes > params.groups;
      rep.violations += b.violation;
      rep.max_distinct = std::max(rep.max_distinct, b.distinct_sizes);
      rep.buckets.push_back(b);
    }
  }
  return rep;
}

std::string TransformReport::to_json() const {
  nlohmann::json j = {{"cost_before", cost_before},
                      {"cost_after", cost_after},
                      {"sampled_cost", sampled_cost},
                      {"sampled_tours", sampled_tours},
                      {"copies_used", copies_used},
                      {"copies_dropped", copies_dropped},
                      {"pad_tokens", pad_tokens},
                      {"orphan_tokens", orphan_tokens},
                      {"big_buckets", big_buckets.size()},
                      {"increases", increases},
                      {"decreases", decreases},
                      {"shortcut_savings", shortcut_savings},
                      {"complexity_violations", complexity.violations},
                      {"max_distinct_sizes", complexity.max_distinct}};
  return j.dump();
}

namespace {

using Content = std::map<NodeId, Tokens>;

// Tours under edit. `cov` counts real tokens below each node; `route`
// additionally counts the virtual pickups that keep a copy on its sampled
// tour's route until the final shortcut. Edge-usage changes are summed as
// they happen.
class Workspace {
  const TreeInstance& inst_;

 public:
  Workspace(const TreeInstance& inst, int tours)
      : inst_(inst),
        pick(tours),
        cov(tours, std::vector<Tokens>(inst.size(), 0)),
        route_(tours, std::vector<Tokens>(inst.size(), 0)),
        virtual_(tours) {}

  void add(int t, NodeId u, Tokens k) {
    if (k == 0) return;
    if ((pick[t][u] += k) == 0) pick[t].erase(u);
    for (NodeId x = u; x != kNoParent; x = inst_.parent(x)) cov[t][x] += k;
    route(t, u, k);
  }

  void add_virtual(int t, NodeId u, Tokens k) {
    if ((virtual_[t][u] += k) == 0) virtual_[t].erase(u);
    route(t, u, k);
  }

  Content take(int t, NodeId v) {
    Content c;
    for (const auto& [u, k] : pick[t]) {
      if (inst_.is_ancestor(v, u)) c[u] = k;
    }
    for (const auto& [u, k] : c) add(t, u, -k);
    return c;
  }

  void give(int t, const Content& c) {
    for (const auto& [u, k] : c) add(t, u, k);
  }

  void drop_virtual() {
    for (std::size_t t = 0; t < virtual_.size(); ++t) {
      const Content marks = virtual_[t];
      for (const auto& [u, k] : marks) add_virtual(static_cast<int>(t), u, -k);
    }
  }

  Weight increases = 0;
  Weight decreases = 0;
  std::vector<Content> pick;
  std::vector<std::vector<Tokens>> cov;

 private:
  void route(int t, NodeId u, Tokens k) {
    for (NodeId x = u; x != kDepot; x = inst_.parent(x)) {
      const Tokens before = route_[t][x];
      route_[t][x] += k;
      if (before == 0 && route_[t][x] > 0) increases += 2 * inst_.weight(x);
      if (before > 0 && route_[t][x] == 0) decreases += 2 * inst_.weight(x);
    }
  }

  std::vector<std::vector<Tokens>> route_;
  std::vector<Content> virtual_;
};

Tokens content_size(const Content& c) {
  Tokens s = 0;
  for (const auto& [u, k] : c) s += k;
  return s;
}

}  // namespace

TransformResult transform(const TreeInstance& inst, const Solution& sol, const TransformParams& params,
                          std::uint64_t seed) {
  {
    auto rep = check_feasible(inst, sol);
    if (!rep.ok()) throw InstanceError("transform needs a feasible solution: " + rep.violations[0].detail);
  }
  if (params.structure.groups < 1) throw std::invalid_argument("transform needs at least one group");
  const int n = inst.size();
  const Tokens q = inst.capacity();
  const auto schedule = thresholds(q, params.eps);
  const int m = static_cast<int>(sol.tours.size());

  // Sampling and level designation. Levels are depths plus one; a tour
  // visits every level from the depot down to its deepest pickup.
  auto rng = make_rng(seed);
  std::vector<int> sampled;
  std::vector<int> designated;
  TransformReport rep;
  rep.cost_before = solution_cost(inst, sol);
  for (int t = 0; t < m; ++t) {
    const bool take = unit_draw(rng) < params.sample_prob;
    if (!take) continue;
    int deepest = 0;
    for (const auto& [u, k] : sol.tours[t].pickups) deepest = std::max(deepest, inst.depth(u));
    sampled.push_back(t);
    designated.push_back(static_cast<int>(uniform_int(rng, 1, deepest + 1)));
    rep.sampled_cost += tour_cost(inst, sol.tours[t]);
  }
  rep.sampled_tours = static_cast<int>(sampled.size());

  const int total = m + 2 * static_cast<int>(sampled.size());
  Workspace ws(inst, total);
  for (int t = 0; t < m; ++t) {
    for (const auto& [u, k] : sol.tours[t].pickups) ws.add(t, u, k);
  }
  ws.increases = 0;
  for (std::size_t s = 0; s < sampled.size(); ++s) {
    for (int c = 0; c < 2; ++c) {
      for (const auto& [u, k] : sol.tours[sampled[s]].pickups) {
        ws.add_virtual(m + 2 * static_cast<int>(s) + c, u, 1);
      }
    }
  }
  if (ws.increases != 2 * rep.sampled_cost) throw std::logic_error("copy routes miscounted");

  std::vector<std::vector<NodeId>> by_level(inst.height() + 2);
  for (NodeId v = 0; v < n; ++v) by_level[inst.depth(v) + 1].push_back(v);
  std::vector<Tokens> pads(n, 0);
  const int g = params.structure.groups;

  for (int level = inst.height() + 1; level >= 1; --level) {
    // items hosted per sampled tour at this level
    std::vector<std::vector<Content>> hosted(sampled.size());
    for (NodeId v : by_level[level]) {
      std::vector<std::vector<Slot>> by_bucket(schedule.size());
      for (int t = 0; t < total; ++t) {
        const Tokens c = ws.cov[t][v];
        if (c > 0) by_bucket[schedule.bucket_of(c)].push_back({c, t});
      }
      // pre-shift buckets of the sampled tours at v
      std::vector<int> sampled_bucket(sampled.size(), -1);
      for (std::size_t s = 0; s < sampled.size(); ++s) {
        const Tokens c = ws.cov[sampled[s]][v];
        if (c > 0) sampled_bucket[s] = schedule.bucket_of(c);
      }
      for (int i = 0; i < schedule.size(); ++i) {
        if (static_cast<std::int64_t>(by_bucket[i].size()) <= params.structure.gamma) continue;
        const auto groups = form_groups(by_bucket[i], g);
        std::vector<Tokens> hmax(g);
        for (int j = 0; j < g; ++j) hmax[j] = group_max(groups[j]);
        BigBucketRecord record;
        record.node = v;
        record.bucket = i;
        record.tours = static_cast<std::int64_t>(by_bucket[i].size());
        record.group_max = hmax;
        std::vector<std::vector<Content>> contents(g);
        for (int j = 0; j < g; ++j) {
          for (const auto& slot : groups[j]) {
            contents[j].push_back(slot.tour >= 0 ? ws.take(slot.tour, v) : Content{});
          }
        }
        // shift: the holder of each slot in group j takes the content of
        // the same slot in group j-1, padded up to that group's maximum
        for (int j = 1; j < g; ++j) {
          for (std::size_t k = 0; k < groups[j].size(); ++k) {
            const Slot& holder = groups[j][k];
            Content c = contents[j - 1][k];
            if (holder.tour < 0) {
              if (!c.empty()) throw std::logic_error("shift onto an empty slot");
              continue;
            }
            if (c.empty()) continue;
            const Tokens pad = hmax[j - 1] - content_size(c);
            if (hmax[j - 1] > holder.size) throw std::logic_error("shift would grow a partial tour");
            c[v] += pad;
            pads[v] += pad;
            record.pad_tokens += pad;
            ws.give(holder.tour, c);
          }
        }
        // orphans of the last group go to sampled tours designated here
        std::vector<int> hosts;
        for (std::size_t s = 0; s < sampled.size(); ++s) {
          if (designated[s] == level && sampled_bucket[s] == i) hosts.push_back(static_cast<int>(s));
        }
        std::vector<Content> orphans;
        for (std::size_t k = 0; k < groups[g - 1].size(); ++k) {
          Content c = contents[g - 1][k];
          if (c.empty()) continue;
          record.orphan_tokens += content_size(c);
          const Tokens pad = hmax[g - 1] - content_size(c);
          c[v] += pad;
          pads[v] += pad;
          record.pad_tokens += pad;
          orphans.push_back(std::move(c));
        }
        record.orphans = static_cast<int>(orphans.size());
        record.hosts = static_cast<int>(hosts.size());
        rep.orphan_tokens += record.orphan_tokens;
        rep.big_buckets.push_back(record);
        if (hosts.size() < orphans.size()) {
          throw TransformRetry("node " + std::to_string(v) + " bucket " + std::to_string(i) + ": " +
                                   std::to_string(orphans.size()) + " orphan partial tours, " +
                                   std::to_string(hosts.size()) + " sampled hosts",
                               v, i, rep.sampled_cost);
        }
        for (std::size_t k = 0; k < orphans.size(); ++k) hosted[hosts[k]].push_back(std::move(orphans[k]));
      }
    }
    // two-bin repack of each sampled tour's items into its copies
    for (std::size_t s = 0; s < sampled.size(); ++s) {
      auto& items = hosted[s];
      if (items.empty()) continue;
      std::stable_sort(items.begin(), items.end(), [](const Content& a, const Content& b) {
        return content_size(a) > content_size(b);
      });
      Tokens first = 0;
      std::size_t cut = 0;
      while (cut < items.size() && first + content_size(items[cut]) <= q) first += content_size(items[cut++]);
      Tokens second = 0;
      for (std::size_t k = cut; k < items.size(); ++k) second += content_size(items[k]);
      if (second > q) {
        throw TransformRetry("sampled tour " + std::to_string(sampled[s]) + " cannot host " +
                                 std::to_string(first + second) + " orphan tokens in two copies",
                             -1, -1, rep.sampled_cost);
      }
      const int c1 = m + 2 * static_cast<int>(s);
      for (std::size_t k = 0; k < items.size(); ++k) ws.give(k < cut ? c1 : c1 + 1, items[k]);
    }
  }

  ws.drop_virtual();
  for (int c = m; c < total; ++c) {
    if (ws.pick[c].empty()) {
      ++rep.copies_dropped;
    } else {
      ++rep.copies_used;
    }
  }
  rep.increases = ws.increases;
  rep.decreases = ws.decreases;
  rep.shortcut_savings = (rep.decreases - (rep.increases - 2 * rep.sampled_cost)) / 2;

  std::vector<Tour> tours;
  for (int t = 0; t < total; ++t) {
    if (!ws.pick[t].empty()) tours.push_back(Tour{ws.pick[t]});
  }
  std::vector<Tokens> demand = inst.demands();
  for (NodeId v = 0; v < n; ++v) {
    demand[v] += pads[v];
    rep.pad_tokens += pads[v];
  }
  TreeInstance out = inst.with_demands(demand);
  Solution out_sol = make_solution(out, std::move(tours));
  rep.cost_after = out_sol.total_cost;
  rep.complexity = profile_complexity(out, out_sol, schedule, params.structure);
  return {std::move(out), std::move(out_sol), std::move(pads), std::move(rep)};
}

Solution strip_pads(const TreeInstance& inst, const std::vector<Tokens>& pads, const Solution& sol) {
  std::vector<Tokens> excess = pads;
  std::vector<Tour> tours = sol.tours;
  for (auto& t : tours) {
    for (auto it = t.pickups.begin(); it != t.pickups.end();) {
      const Tokens cut = std::min(excess[it->first], it->second);
      excess[it->first] -= cut;
      it->second -= cut;
      it = it->second == 0 ? t.pickups.erase(it) : std::next(it);
    }
  }
  return make_solution(inst, std::move(tours));
}

}  // namespace cvrp
