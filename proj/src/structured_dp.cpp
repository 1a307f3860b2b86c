#include "cvrp/structured_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace cvrp {

// ---- NodeProfile -------------------------------------------------------------

NodeProfile NodeProfile::from_sizes(Tokens o, std::vector<Tokens> sizes, const ThresholdSchedule& schedule,
                                    const StructureParams& params) {
  NodeProfile p;
  p.o_ = o;
  p.buckets_.resize(schedule.size());
  std::sort(sizes.begin(), sizes.end());
  std::vector<std::vector<Tokens>> by_bucket(schedule.size());
  for (Tokens s : sizes) {
    if (s < 1 || s > schedule.capacity) {
      throw std::invalid_argument("profile size " + std::to_string(s) + " outside [1, Q]");
    }
    by_bucket[schedule.bucket_of(s)].push_back(s);
  }
  for (int i = 0; i < schedule.size(); ++i) {
    auto& list = by_bucket[i];
    auto& b = p.buckets_[i];
    if (static_cast<std::int64_t>(list.size()) <= params.gamma) {
      b.exact = std::move(list);
      continue;
    }
    for (Tokens s : list) {
      if (b.heads.empty() || b.heads.back() != s) {
        b.heads.push_back(s);
        b.counts.push_back(0);
      }
      ++b.counts.back();
    }
    if (static_cast<int>(b.heads.size()) > params.groups) {
      throw std::invalid_argument("big bucket " + std::to_string(i) + " has " +
                                  std::to_string(b.heads.size()) + " sizes, more than g = " +
                                  std::to_string(params.groups));
    }
  }
  return p;
}

std::vector<Tokens> NodeProfile::sizes() const {
  std::vector<Tokens> out;
  for (const auto& b : buckets_) {
    out.insert(out.end(), b.exact.begin(), b.exact.end());
    for (std::size_t j = 0; j < b.heads.size(); ++j) out.insert(out.end(), b.counts[j], b.heads[j]);
  }
  return out;
}

std::int64_t NodeProfile::tours() const {
  std::int64_t m = 0;
  for (const auto& b : buckets_) {
    m += static_cast<std::int64_t>(b.exact.size());
    m += std::accumulate(b.counts.begin(), b.counts.end(), std::int64_t{0});
  }
  return m;
}

std::string NodeProfile::encode() const {
  std::ostringstream os;
  os << "o" << o_;
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    const auto& b = buckets_[i];
    if (b.empty()) continue;
    os << "|" << i;
    if (!b.exact.empty()) {
      os << "t";
      for (Tokens s : b.exact) os << "," << s;
    } else {
      os << "h";
      for (std::size_t j = 0; j < b.heads.size(); ++j) os << "," << b.heads[j] << "x" << b.counts[j];
    }
  }
  return os.str();
}

// ---- consistency -------------------------------------------------------------

namespace {

using Profile = std::vector<Tokens>;

struct ConsistencyMemo {
  std::map<std::tuple<Tokens, Profile, Profile, Profile>, bool> memo;

  bool run(Tokens extra, const Profile& zv, const Profile& z1, const Profile& z2) {
    if (zv.empty()) return extra == 0 && z1.empty() && z2.empty();
    if (z1.size() > zv.size() || z2.size() > zv.size()) return false;
    const Tokens total = std::accumulate(zv.begin(), zv.end(), Tokens{0});
    if (total != extra + std::accumulate(z1.begin(), z1.end(), Tokens{0}) +
                     std::accumulate(z2.begin(), z2.end(), Tokens{0})) {
      return false;
    }
    auto key = std::make_tuple(extra, zv, z1, z2);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    const Tokens t = zv.back();
    Profile rest(zv.begin(), zv.end() - 1);
    bool ok = false;
    // Index -1 means absorbing nothing from that side.
    for (int a = -1; a < static_cast<int>(z1.size()) && !ok; ++a) {
      if (a > 0 && z1[a] == z1[a - 1]) continue;
      const Tokens ta = a < 0 ? 0 : z1[a];
      for (int b = -1; b < static_cast<int>(z2.size()) && !ok; ++b) {
        if (b > 0 && z2[b] == z2[b - 1]) continue;
        const Tokens tb = b < 0 ? 0 : z2[b];
        const Tokens oc = t - ta - tb;
        if (oc < 0 || oc > extra) continue;
        Profile r1 = z1, r2 = z2;
        if (a >= 0) r1.erase(r1.begin() + a);
        if (b >= 0) r2.erase(r2.begin() + b);
        ok = run(extra - oc, rest, r1, r2);
      }
    }
    memo.emplace(std::move(key), ok);
    return ok;
  }
};

}  // namespace

bool check_consistency(Tokens extra, std::vector<Tokens> zv, std::vector<Tokens> z1, std::vector<Tokens> z2) {
  if (extra < 0) return false;
  for (const auto* z : {&zv, &z1, &z2}) {
    for (Tokens s : *z) {
      if (s < 1) return false;
    }
  }
  std::sort(zv.begin(), zv.end());
  std::sort(z1.begin(), z1.end());
  std::sort(z2.begin(), z2.end());
  ConsistencyMemo memo;
  return memo.run(extra, zv, z1, z2);
}

bool check_consistency(Tokens extra, const NodeProfile& zv, const NodeProfile& z1, const NodeProfile& z2) {
  return check_consistency(extra, zv.sizes(), z1.sizes(), z2.sizes());
}

// ---- profile DP engine -------------------------------------------------------

namespace {

constexpr Weight kInf = std::numeric_limits<Weight>::max() / 4;

// Where a slot of a new profile came from: a slot of the previous stage, a
// slot of the child's table, and tokens added at the node (local tokens or
// pads, depending on the stage).
struct Comp {
  int prev = -1;
  int child = -1;
  Tokens add = 0;
  auto operator<=>(const Comp&) const = default;
};

struct Entry {
  Profile prof;
  Weight cost = 0;
  int prev = -1;
  int child = -1;
  std::vector<Comp> comp;
};

struct Table {
  std::vector<Entry> entries;
  std::map<Profile, int> index;

  void offer(std::vector<std::pair<Tokens, Comp>> slots, Weight cost, int prev, int child) {
    std::sort(slots.begin(), slots.end());
    Profile prof;
    std::vector<Comp> comp;
    prof.reserve(slots.size());
    comp.reserve(slots.size());
    for (auto& [s, c] : slots) {
      prof.push_back(s);
      comp.push_back(c);
    }
    auto [it, fresh] = index.try_emplace(prof, static_cast<int>(entries.size()));
    if (fresh) {
      entries.push_back(Entry{std::move(prof), cost, prev, child, std::move(comp)});
    } else if (cost < entries[it->second].cost) {
      entries[it->second] = Entry{std::move(prof), cost, prev, child, std::move(comp)};
    }
  }
};

enum class Mode { Bicriteria, Structured };

class Engine {
 public:
  Engine(const TreeInstance& inst, Mode mode, ThresholdSchedule schedule, StructureParams structure,
         std::int64_t budget, bool verify)
      : inst_(inst),
        mode_(mode),
        schedule_(std::move(schedule)),
        structure_(structure),
        budget_(budget),
        verify_(verify),
        stages_(inst.size()) {}

  DpResult run() {
    DpResult result;
    result.stats.states.assign(inst_.size(), 0);
    const auto& order = inst_.preorder();
    for (auto it = order.rbegin(); it != order.rend(); ++it) process(*it, result.stats);

    const Table& root = stages_[kDepot].back();
    int best = -1;
    for (int i = 0; i < static_cast<int>(root.entries.size()); ++i) {
      const Entry& e = root.entries[i];
      if (best < 0 || e.cost < root.entries[best].cost ||
          (e.cost == root.entries[best].cost && e.prof < root.entries[best].prof)) {
        best = i;
      }
    }
    const Entry& top = root.entries.at(best);
    tours_.assign(top.prof.size(), Tour{});
    std::vector<int> ids(top.prof.size());
    std::iota(ids.begin(), ids.end(), 0);
    backtrack(kDepot, best, ids);

    result.stats.dp_cost = top.cost;
    result.stats.pad_tokens = pads_;
    result.solution = make_solution(inst_, std::move(tours_));
    for (const auto& t : result.solution.tours) result.stats.max_load = std::max(result.stats.max_load, t.load());
    return result;
  }

 private:
  Tokens record(Tokens s) const {
    if (mode_ == Mode::Structured) return s;
    return schedule_.sigma[schedule_.bucket_of(s)];
  }

  void guard(NodeId v, const Table& t) const {
    if (static_cast<std::int64_t>(t.entries.size()) > budget_) {
      throw ResourceLimitError("state budget of " + std::to_string(budget_) + " exceeded at node " +
                                   std::to_string(v),
                               v);
    }
  }

  void check(Tokens extra, const std::vector<std::pair<Tokens, Comp>>& slots, const Profile& a,
             const Profile& b) const {
    if (!verify_) return;
    Profile zv;
    for (const auto& s : slots) zv.push_back(s.first);
    if (!check_consistency(extra, zv, a, b)) throw std::logic_error("inconsistent DP transition");
  }

  void process(NodeId v, DpStats& stats) {
    auto& st = stages_[v];
    const Tokens q = inst_.capacity();
    st.emplace_back();
    st.back().offer({}, 0, -1, -1);

    for (NodeId u : inst_.children(v)) {
      Table next;
      const Table& prev = st.back();
      const Table& child = stages_[u].back();
      for (int pi = 0; pi < static_cast<int>(prev.entries.size()); ++pi) {
        for (int ci = 0; ci < static_cast<int>(child.entries.size()); ++ci) {
          combine(prev.entries[pi], pi, child.entries[ci], ci, q, next);
        }
        guard(v, next);
      }
      st.push_back(std::move(next));
    }

    Table local;
    const Table& before = st.back();
    for (int pi = 0; pi < static_cast<int>(before.entries.size()); ++pi) {
      distribute(before.entries[pi], pi, inst_.demand(v), q, local);
      guard(v, local);
    }
    st.push_back(std::move(local));

    Table fin;
    const Table& loc = st.back();
    const Weight edge = v == kDepot ? 0 : 2 * inst_.weight(v);
    for (int pi = 0; pi < static_cast<int>(loc.entries.size()); ++pi) {
      finalize(loc.entries[pi], pi, edge, fin);
      guard(v, fin);
    }
    st.push_back(std::move(fin));

    for (const auto& t : st) {
      const auto k = static_cast<std::int64_t>(t.entries.size());
      stats.states[v] = std::max(stats.states[v], k);
      stats.total_states += k;
      stats.max_states = std::max(stats.max_states, k);
    }
  }

  // Each child tour joins a distinct tour of the previous stage or stays on
  // its own. Equal child sizes choose targets in non-decreasing size class
  // order; within a class the lowest free slot is used.
  void combine(const Entry& p, int pi, const Entry& c, int ci, Tokens q, Table& out) {
    struct Group {
      Tokens size;
      int first;
      int count;
    };
    std::vector<Group> groups;
    for (int i = 0; i < static_cast<int>(p.prof.size()); ++i) {
      if (groups.empty() || groups.back().size != p.prof[i]) groups.push_back({p.prof[i], i, 0});
      ++groups.back().count;
    }
    std::vector<int> used(groups.size(), 0);
    std::vector<int> target(c.prof.size(), -1);
    const int m = static_cast<int>(c.prof.size());

    auto emit = [&] {
      std::vector<std::pair<Tokens, Comp>> slots;
      std::vector<int> joined(p.prof.size(), -1);
      for (int k = 0; k < m; ++k) {
        if (target[k] < 0) {
          slots.push_back({c.prof[k], Comp{-1, k, 0}});
        } else {
          joined[target[k]] = k;
        }
      }
      for (int i = 0; i < static_cast<int>(p.prof.size()); ++i) {
        const int k = joined[i];
        slots.push_back(k < 0 ? std::pair{p.prof[i], Comp{i, -1, 0}}
                              : std::pair{record(p.prof[i] + c.prof[k]), Comp{i, k, 0}});
      }
      check(0, slots, p.prof, c.prof);
      out.offer(std::move(slots), p.cost + c.cost, pi, ci);
    };

    auto rec = [&](auto&& self, int k, int last) -> void {
      if (k == m) {
        emit();
        return;
      }
      const int floor = (k > 0 && c.prof[k] == c.prof[k - 1]) ? last : -1;
      if (floor <= -1) {
        target[k] = -1;
        self(self, k + 1, -1);
      }
      for (int g = std::max(floor, 0); g < static_cast<int>(groups.size()); ++g) {
        if (used[g] == groups[g].count || groups[g].size + c.prof[k] > q) continue;
        target[k] = groups[g].first + used[g];
        ++used[g];
        self(self, k + 1, g);
        --used[g];
      }
      target[k] = -1;
    };
    rec(rec, 0, -1);
  }

  // Local tokens go to existing tours (non-increasing amounts across equal
  // sizes) and the remainder forms new tours (non-increasing sizes).
  void distribute(const Entry& p, int pi, Tokens d, Tokens q, Table& out) {
    const int m = static_cast<int>(p.prof.size());
    std::vector<Tokens> x(m, 0);
    std::vector<Tokens> parts;

    auto emit = [&] {
      std::vector<std::pair<Tokens, Comp>> slots;
      for (int i = 0; i < m; ++i) {
        slots.push_back({x[i] > 0 ? record(p.prof[i] + x[i]) : p.prof[i], Comp{i, -1, x[i]}});
      }
      for (Tokens s : parts) slots.push_back({record(s), Comp{-1, -1, s}});
      check(d, slots, p.prof, {});
      out.offer(std::move(slots), p.cost, pi, -1);
    };

    auto split = [&](auto&& self, Tokens left, Tokens cap) -> void {
      if (left == 0) {
        emit();
        return;
      }
      for (Tokens s = std::min(left, cap); s >= 1; --s) {
        parts.push_back(s);
        self(self, left - s, s);
        parts.pop_back();
      }
    };

    auto rec = [&](auto&& self, int i, Tokens left) -> void {
      if (i == m) {
        split(split, left, q);
        return;
      }
      Tokens hi = std::min(left, q - p.prof[i]);
      if (i > 0 && p.prof[i] == p.prof[i - 1]) hi = std::min(hi, x[i - 1]);
      for (Tokens k = hi; k >= 0; --k) {
        x[i] = k;
        self(self, i + 1, left - k);
      }
      x[i] = 0;
    };
    rec(rec, 0, d);
  }

  // Structured mode: per bucket, keep the sizes as they are (allowed when
  // the bucket is small or already has at most g sizes) or lift every size
  // to the next member of a target set H that contains the bucket maximum,
  // |H| <= g, |H| below the number of distinct sizes.
  void finalize(const Entry& p, int pi, Weight edge, Table& out) {
    const Weight cost = p.cost + edge * static_cast<Weight>(p.prof.size());
    if (mode_ == Mode::Bicriteria) {
      std::vector<std::pair<Tokens, Comp>> slots;
      for (int i = 0; i < static_cast<int>(p.prof.size()); ++i) slots.push_back({p.prof[i], Comp{i, -1, 0}});
      out.offer(std::move(slots), cost, pi, -1);
      return;
    }

    struct Range {
      int begin, end;
      std::vector<std::vector<Tokens>> options;
    };
    std::vector<Range> ranges;
    const int m = static_cast<int>(p.prof.size());
    for (int i = 0; i < m;) {
      const int b = schedule_.bucket_of(p.prof[i]);
      int j = i;
      while (j < m && schedule_.bucket_of(p.prof[j]) == b) ++j;
      ranges.push_back({i, j, {}});
      i = j;
    }

    for (auto& r : ranges) {
      std::vector<Tokens> distinct;
      for (int i = r.begin; i < r.end; ++i) {
        if (distinct.empty() || distinct.back() != p.prof[i]) distinct.push_back(p.prof[i]);
      }
      const auto dn = static_cast<int>(distinct.size());
      const std::vector<Tokens> raw(p.prof.begin() + r.begin, p.prof.begin() + r.end);
      if (r.end - r.begin <= structure_.gamma || dn <= structure_.groups) r.options.push_back(raw);
      const int extra_max = std::min(structure_.groups - 1, dn - 2);
      std::vector<int> pick;
      auto subsets = [&](auto&& self, int from) -> void {
        std::vector<Tokens> heads;
        for (int k : pick) heads.push_back(distinct[k]);
        heads.push_back(distinct.back());
        std::vector<Tokens> lifted;
        for (Tokens s : raw) lifted.push_back(*std::lower_bound(heads.begin(), heads.end(), s));
        r.options.push_back(std::move(lifted));
        if (static_cast<int>(pick.size()) == extra_max) return;
        for (int k = from; k < dn - 1; ++k) {
          pick.push_back(k);
          self(self, k + 1);
          pick.pop_back();
        }
      };
      if (dn >= 2 && extra_max >= 0) subsets(subsets, 0);
    }

    std::vector<Tokens> sizes(m);
    auto rec = [&](auto&& self, std::size_t k) -> void {
      if (k == ranges.size()) {
        std::vector<std::pair<Tokens, Comp>> slots;
        Tokens pad = 0;
        for (int i = 0; i < m; ++i) {
          slots.push_back({sizes[i], Comp{i, -1, sizes[i] - p.prof[i]}});
          pad += sizes[i] - p.prof[i];
        }
        check(pad, slots, p.prof, {});
        out.offer(std::move(slots), cost, pi, -1);
        return;
      }
      const auto& r = ranges[k];
      for (const auto& opt : r.options) {
        std::copy(opt.begin(), opt.end(), sizes.begin() + r.begin);
        self(self, k + 1);
      }
    };
    rec(rec, 0);
  }

  void backtrack(NodeId v, int index, const std::vector<int>& ids) {
    const auto& st = stages_[v];
    const int k = static_cast<int>(inst_.children(v).size());

    const Entry& fin = st[k + 2].entries[index];
    const Entry& loc = st[k + 1].entries[fin.prev];
    std::vector<int> loc_ids(loc.prof.size(), -1);
    for (std::size_t i = 0; i < fin.comp.size(); ++i) {
      loc_ids[fin.comp[i].prev] = ids[i];
      pads_ += fin.comp[i].add;
    }

    const Entry* cur = &st[k].entries[loc.prev];
    std::vector<int> cur_ids(cur->prof.size(), -1);
    for (std::size_t i = 0; i < loc.comp.size(); ++i) {
      const Comp& c = loc.comp[i];
      if (c.add > 0) tours_[loc_ids[i]].pickups[v] += c.add;
      if (c.prev >= 0) cur_ids[c.prev] = loc_ids[i];
    }

    for (int j = k; j >= 1; --j) {
      const NodeId u = inst_.children(v)[j - 1];
      const Entry& child = stages_[u].back().entries[cur->child];
      std::vector<int> child_ids(child.prof.size(), -1);
      const Entry& prev = st[j - 1].entries[cur->prev];
      std::vector<int> prev_ids(prev.prof.size(), -1);
      for (std::size_t i = 0; i < cur->comp.size(); ++i) {
        const Comp& c = cur->comp[i];
        if (c.prev >= 0) prev_ids[c.prev] = cur_ids[i];
        if (c.child >= 0) child_ids[c.child] = cur_ids[i];
      }
      backtrack(u, cur->child, child_ids);
      cur = &prev;
      cur_ids = std::move(prev_ids);
    }
  }

  const TreeInstance& inst_;
  Mode mode_;
  ThresholdSchedule schedule_;
  StructureParams structure_;
  std::int64_t budget_;
  bool verify_;
  // stages_[v]: empty table, one per child, local tokens, final (A).
  std::vector<std::vector<Table>> stages_;
  std::vector<Tour> tours_;
  Tokens pads_ = 0;
};

DpResult with_trivial(const TreeInstance& inst, const NormalizedInstance& norm, DpResult r) {
  r.solution = canonical(combine(inst, norm.trivial_tours, r.solution));
  r.stats.dp_cost += solution_cost(inst, norm.trivial_tours);
  for (const auto& t : r.solution.tours) r.stats.max_load = std::max(r.stats.max_load, t.load());
  return r;
}

Rational floor_dyadic(double x) {
  constexpr std::int64_t kDen = std::int64_t{1} << 40;
  return Rational(static_cast<std::int64_t>(std::floor(x * static_cast<double>(kDen))), kDen);
}

}  // namespace

Rational bicriteria_eps(const TreeInstance& inst, const Rational& eps) {
  if (eps <= 0) throw std::invalid_argument("eps must be positive");
  std::vector<std::int64_t> r(inst.size(), 0);
  const auto& order = inst.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    std::int64_t below = 0;
    for (NodeId u : inst.children(v)) below = std::max(below, r[u]);
    r[v] = below + std::max<std::int64_t>(static_cast<std::int64_t>(inst.children(v).size()), 1);
  }
  const double e = eps.convert_to<double>();
  const double lg = std::max(1.0, std::log2(static_cast<double>(std::max(inst.size(), 2))));
  const double value = std::min(e * e / (lg * lg), std::log1p(e) / static_cast<double>(r[kDepot]));
  Rational out = floor_dyadic(value);
  if (out <= 0) out = Rational(1, std::int64_t{1} << 40);
  return out;
}

DpResult solve_bicriteria(const TreeInstance& inst, const BicriteriaParams& params) {
  const auto norm = normalize_demands(inst);
  const Rational eps_used = bicriteria_eps(norm.residual, params.eps);
  Engine engine(norm.residual, Mode::Bicriteria, thresholds(inst.capacity(), eps_used), StructureParams{},
                params.state_budget, false);
  auto r = with_trivial(inst, norm, engine.run());
  r.stats.eps_used = eps_used;
  return r;
}

StructuredParams default_structured_params(int n, const Rational& eps) {
  StructuredParams p;
  p.eps = eps;
  p.structure = default_structure_params(n, eps);
  return p;
}

DpResult solve_structured(const TreeInstance& inst, const StructuredParams& params) {
  if (params.structure.groups < 1) throw std::invalid_argument("need at least one group per big bucket");
  if (params.structure.gamma < 0) throw std::invalid_argument("gamma must be non-negative");
  const auto norm = normalize_demands(inst);
  Engine engine(norm.residual, Mode::Structured, thresholds(inst.capacity(), params.eps), params.structure,
                params.state_budget, params.verify_transitions);
  auto r = with_trivial(inst, norm, engine.run());
  r.stats.eps_used = params.eps;
  return r;
}

}  // namespace cvrp
