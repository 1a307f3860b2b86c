#include "cvrp/instance.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cvrp {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::int64_t parse_int(std::string_view s, int line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InstanceError("line " + std::to_string(line_no) + ": expected integer, got '" +
                        std::string(s) + "'");
  }
  return value;
}

template <class F>
void for_each_line(std::string_view text, F&& f) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_ws(line);
    if (!tokens.empty()) f(tokens, line_no);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

}  // namespace

TreeInstance::TreeInstance(Tokens capacity, std::vector<NodeId> parent,
                           std::vector<Weight> weight, std::vector<Tokens> demand)
    : capacity_(capacity),
      parent_(std::move(parent)),
      weight_(std::move(weight)),
      demand_(std::move(demand)) {
  const int n = static_cast<int>(parent_.size());
  if (n < 1) throw InstanceError("instance needs at least the depot");
  if (capacity_ <= 0) throw InstanceError("capacity Q must be positive");
  if (static_cast<int>(weight_.size()) != n || static_cast<int>(demand_.size()) != n) {
    throw InstanceError("parent, weight and demand vectors differ in length");
  }
  if (parent_[0] != kNoParent) throw InstanceError("node 0 must be the root");
  weight_[0] = 0;
  for (NodeId v = 1; v < n; ++v) {
    if (parent_[v] < 0 || parent_[v] >= n || parent_[v] == v) {
      throw InstanceError("node " + std::to_string(v) + " has invalid parent");
    }
    if (weight_[v] < 0) throw InstanceError("negative weight on edge to " + std::to_string(v));
  }
  for (NodeId v = 0; v < n; ++v) {
    if (demand_[v] < 0) throw InstanceError("negative demand at node " + std::to_string(v));
  }

  child_begin_.assign(n + 1, 0);
  for (NodeId v = 1; v < n; ++v) ++child_begin_[parent_[v] + 1];
  std::partial_sum(child_begin_.begin(), child_begin_.end(), child_begin_.begin());
  child_list_.assign(std::max(n - 1, 0), 0);
  {
    auto fill = child_begin_;
    for (NodeId v = 1; v < n; ++v) child_list_[fill[parent_[v]]++] = v;
  }

  depth_.assign(n, -1);
  dist_.assign(n, 0);
  tin_.assign(n, 0);
  tout_.assign(n, 0);
  preorder_.reserve(n);
  std::vector<std::pair<NodeId, int>> stack{{kDepot, 0}};
  depth_[kDepot] = 0;
  int timer = 0;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next == 0) {
      tin_[v] = timer++;
      preorder_.push_back(v);
    }
    auto kids = children(v);
    if (next < static_cast<int>(kids.size())) {
      NodeId c = kids[next++];
      depth_[c] = depth_[v] + 1;
      dist_[c] = dist_[v] + weight_[c];
      stack.push_back({c, 0});
    } else {
      tout_[v] = timer;
      stack.pop_back();
    }
  }
  if (static_cast<int>(preorder_.size()) != n) {
    for (NodeId v = 0; v < n; ++v) {
      if (depth_[v] < 0) {
        throw InstanceError("node " + std::to_string(v) + " is unreachable from the depot");
      }
    }
  }

  subtree_size_.assign(n, 1);
  subtree_demand_ = demand_;
  for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) {
    NodeId v = *it;
    if (v != kDepot) {
      subtree_size_[parent_[v]] += subtree_size_[v];
      subtree_demand_[parent_[v]] += subtree_demand_[v];
    }
    height_ = std::max(height_, depth_[v]);
  }
  total_demand_ = subtree_demand_[kDepot];
}

std::span<const NodeId> TreeInstance::children(NodeId v) const {
  return {child_list_.data() + child_begin_[v],
          static_cast<std::size_t>(child_begin_[v + 1] - child_begin_[v])};
}

bool TreeInstance::is_ancestor(NodeId a, NodeId v) const {
  return tin_[a] <= tin_[v] && tout_[v] <= tout_[a];
}

TreeInstance TreeInstance::with_demands(std::vector<Tokens> demand) const {
  return TreeInstance(capacity_, parent_, weight_, std::move(demand));
}

TreeInstance TreeInstance::with_capacity(Tokens capacity) const {
  return TreeInstance(capacity, parent_, weight_, demand_);
}

Tokens Tour::load() const {
  Tokens total = 0;
  for (const auto& [node, k] : pickups) total += k;
  return total;
}

Weight tour_cost(const TreeInstance& inst, const Tour& tour) {
  // Climb from each pickup until reaching an already-marked node.
  std::vector<char> marked(inst.size(), 0);
  marked[kDepot] = 1;
  Weight sum = 0;
  for (const auto& [node, k] : tour.pickups) {
    if (k <= 0) continue;
    for (NodeId v = node; !marked[v]; v = inst.parent(v)) {
      marked[v] = 1;
      sum += inst.weight(v);
    }
  }
  return 2 * sum;
}

Weight solution_cost(const TreeInstance& inst, const Solution& sol) {
  Weight total = 0;
  for (const auto& t : sol.tours) total += tour_cost(inst, t);
  return total;
}

Solution make_solution(const TreeInstance& inst, std::vector<Tour> tours) {
  Solution sol;
  for (auto& t : tours) {
    std::erase_if(t.pickups, [](const auto& p) { return p.second == 0; });
    if (!t.pickups.empty()) sol.tours.push_back(std::move(t));
  }
  sol.total_cost = solution_cost(inst, sol);
  return sol;
}

std::vector<Tokens> covered(const TreeInstance& inst, const Solution& sol) {
  std::vector<Tokens> out(inst.size(), 0);
  for (const auto& t : sol.tours) {
    for (const auto& [node, k] : t.pickups) {
      if (node >= 0 && node < inst.size()) out[node] += k;
    }
  }
  return out;
}

Solution canonical(Solution sol) {
  std::sort(sol.tours.begin(), sol.tours.end());
  return sol;
}

Solution combine(const TreeInstance& inst, const Solution& a, const Solution& b) {
  std::vector<Tour> tours = a.tours;
  tours.insert(tours.end(), b.tours.begin(), b.tours.end());
  return make_solution(inst, std::move(tours));
}

TreeInstance load_instance(std::string_view text) {
  bool have_header = false;
  std::int64_t n = -1;
  std::int64_t q = 0;
  bool have_q = false;
  std::vector<NodeId> parent;
  std::vector<Weight> weight;
  std::vector<Tokens> demand;
  std::vector<char> has_parent;
  std::vector<char> has_demand;
  int edges = 0;

  auto need_n = [&](int line_no) {
    if (n < 0) throw InstanceError("line " + std::to_string(line_no) + ": 'n' must come first");
  };
  auto check_node = [&](std::int64_t v, int line_no) {
    if (v < 0 || v >= n) {
      throw InstanceError("line " + std::to_string(line_no) + ": node " + std::to_string(v) +
                          " out of range");
    }
  };

  for_each_line(text, [&](const std::vector<std::string_view>& tok, int line_no) {
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!have_header) {
      if (tok.size() != 2 || tok[0] != "cvrp-tree" || tok[1] != "v1") {
        throw InstanceError(where + "expected header 'cvrp-tree v1'");
      }
      have_header = true;
      return;
    }
    if (tok[0] == "n") {
      if (tok.size() != 2 || n >= 0) throw InstanceError(where + "bad or repeated 'n'");
      n = parse_int(tok[1], line_no);
      if (n < 1) throw InstanceError(where + "n must be at least 1");
      parent.assign(n, kNoParent);
      weight.assign(n, 0);
      demand.assign(n, 0);
      has_parent.assign(n, 0);
      has_demand.assign(n, 0);
    } else if (tok[0] == "Q") {
      if (tok.size() != 2 || have_q) throw InstanceError(where + "bad or repeated 'Q'");
      q = parse_int(tok[1], line_no);
      if (q <= 0) throw InstanceError(where + "Q must be positive");
      have_q = true;
    } else if (tok[0] == "edge") {
      need_n(line_no);
      if (tok.size() != 4) throw InstanceError(where + "expected 'edge <parent> <child> <weight>'");
      auto p = parse_int(tok[1], line_no);
      auto c = parse_int(tok[2], line_no);
      auto w = parse_int(tok[3], line_no);
      check_node(p, line_no);
      check_node(c, line_no);
      if (c == kDepot) throw InstanceError(where + "the depot cannot be a child");
      if (has_parent[c]) throw InstanceError(where + "duplicate node id " + std::to_string(c));
      if (w < 0) throw InstanceError(where + "negative weight");
      has_parent[c] = 1;
      parent[c] = static_cast<NodeId>(p);
      weight[c] = w;
      ++edges;
    } else if (tok[0] == "demand") {
      need_n(line_no);
      if (tok.size() != 3) throw InstanceError(where + "expected 'demand <node> <tokens>'");
      auto v = parse_int(tok[1], line_no);
      auto d = parse_int(tok[2], line_no);
      check_node(v, line_no);
      if (has_demand[v]) throw InstanceError(where + "duplicate demand for node " + std::to_string(v));
      if (d < 0) throw InstanceError(where + "negative demand");
      has_demand[v] = 1;
      demand[v] = d;
    } else {
      throw InstanceError(where + "unknown keyword '" + std::string(tok[0]) + "'");
    }
  });

  if (!have_header) throw InstanceError("missing header 'cvrp-tree v1'");
  if (n < 0) throw InstanceError("missing 'n'");
  if (!have_q) throw InstanceError("missing 'Q'");
  if (edges != n - 1) {
    throw InstanceError("expected " + std::to_string(n - 1) + " edges, got " + std::to_string(edges));
  }
  // A parent chain that never reaches the depot is a cycle; the constructor
  // reports it as an unreachable node.
  return TreeInstance(q, std::move(parent), std::move(weight), std::move(demand));
}

std::string save_instance(const TreeInstance& inst) {
  std::ostringstream out;
  out << "cvrp-tree v1\n";
  out << "n " << inst.size() << "\n";
  out << "Q " << inst.capacity() << "\n";
  for (NodeId v = 1; v < inst.size(); ++v) {
    out << "edge " << inst.parent(v) << ' ' << v << ' ' << inst.weight(v) << "\n";
  }
  for (NodeId v = 0; v < inst.size(); ++v) {
    if (inst.demand(v) != 0) out << "demand " << v << ' ' << inst.demand(v) << "\n";
  }
  return out.str();
}

Solution load_solution(std::string_view text) {
  Solution sol;
  bool have_cost = false;
  for_each_line(text, [&](const std::vector<std::string_view>& tok, int line_no) {
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (have_cost) throw InstanceError(where + "content after the cost line");
    if (tok[0] == "tour") {
      Tour t;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        auto colon = tok[i].find(':');
        if (colon == std::string_view::npos) throw InstanceError(where + "expected <node>:<tokens>");
        auto node = parse_int(tok[i].substr(0, colon), line_no);
        auto k = parse_int(tok[i].substr(colon + 1), line_no);
        if (k <= 0) throw InstanceError(where + "pickup counts must be positive");
        if (t.pickups.count(static_cast<NodeId>(node))) {
          throw InstanceError(where + "node listed twice in one tour");
        }
        t.pickups[static_cast<NodeId>(node)] = k;
      }
      if (t.pickups.empty()) throw InstanceError(where + "empty tour");
      sol.tours.push_back(std::move(t));
    } else if (tok[0] == "cost") {
      if (tok.size() != 2) throw InstanceError(where + "expected 'cost <int>'");
      sol.total_cost = parse_int(tok[1], line_no);
      have_cost = true;
    } else {
      throw InstanceError(where + "unknown keyword '" + std::string(tok[0]) + "'");
    }
  });
  if (!have_cost) throw InstanceError("missing trailing 'cost' line");
  return sol;
}

std::string save_solution(const Solution& sol) {
  std::ostringstream out;
  for (const auto& t : sol.tours) {
    out << "tour";
    for (const auto& [node, k] : t.pickups) out << ' ' << node << ':' << k;
    out << "\n";
  }
  out << "cost " << sol.total_cost << "\n";
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InstanceError("cannot write " + path);
  out << contents;
}

NormalizedInstance normalize_demands(const TreeInstance& inst) {
  const Tokens q = inst.capacity();
  std::vector<Tokens> residual = inst.demands();
  std::vector<Tour> trivial;
  for (NodeId v = 0; v < inst.size(); ++v) {
    while (residual[v] >= q) {
      trivial.push_back(Tour{{{v, q}}});
      residual[v] -= q;
    }
  }
  return {inst.with_demands(std::move(residual)), make_solution(inst, std::move(trivial))};
}

namespace {

// cpp_int's string constructor treats a leading 0 as octal.
boost::multiprecision::cpp_int decimal_int(const std::string& digits) {
  boost::multiprecision::cpp_int value = 0;
  std::size_t i = 0;
  bool negative = false;
  if (i < digits.size() && (digits[i] == '-' || digits[i] == '+')) negative = digits[i++] == '-';
  if (i == digits.size()) throw InstanceError("bad number '" + digits + "'");
  for (; i < digits.size(); ++i) {
    if (digits[i] < '0' || digits[i] > '9') throw InstanceError("bad number '" + digits + "'");
    value = value * 10 + (digits[i] - '0');
  }
  return negative ? -value : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  using boost::multiprecision::cpp_int;
  std::string s(text);
  if (s.empty()) throw InstanceError("empty number");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    cpp_int num = decimal_int(s.substr(0, slash));
    cpp_int den = decimal_int(s.substr(slash + 1));
    if (den == 0) throw InstanceError("zero denominator in '" + s + "'");
    return Rational(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(decimal_int(s));
  std::string frac = s.substr(dot + 1);
  cpp_int den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::string whole = s.substr(0, dot);
  if (whole.empty() || whole == "-" || whole == "+") whole += "0";
  const bool negative = whole[0] == '-';
  cpp_int magnitude = decimal_int(negative ? whole.substr(1) : whole) * den +
                      (frac.empty() ? cpp_int(0) : decimal_int(frac));
  return Rational(negative ? -magnitude : magnitude, den);
}

ScaledInstance scale_weights(const TreeInstance& inst, const Rational& eps, Weight max_weight) {
  using boost::multiprecision::cpp_int;
  if (eps <= 0) throw InstanceError("eps must be positive");
  const int n = inst.size();

  std::vector<char> dropped(n, 0);
  for (NodeId v : inst.preorder()) {
    if (v == kDepot) continue;
    dropped[v] = dropped[inst.parent(v)] || inst.weight(v) > max_weight;
    if (dropped[v] && inst.demand(v) > 0) {
      throw InstanceError("removing edges heavier than " + std::to_string(max_weight) +
                          " disconnects demand node " + std::to_string(v));
    }
  }

  std::vector<NodeId> kept;
  std::vector<NodeId> new_id(n, -1);
  for (NodeId v = 0; v < n; ++v) {
    if (!dropped[v]) {
      new_id[v] = static_cast<NodeId>(kept.size());
      kept.push_back(v);
    }
  }

  const cpp_int n3 = cpp_int(n) * n * n;
  const Rational floor_weight = eps * Rational(max_weight) / Rational(4 * n3);
  std::vector<Rational> lifted(kept.size(), Rational(0));
  Rational smallest = -1;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    Rational w(inst.weight(kept[i]));
    lifted[i] = w < floor_weight ? floor_weight : w;
    if (smallest < 0 || lifted[i] < smallest) smallest = lifted[i];
  }
  Rational factor = 1;
  if (smallest > 0) factor = Rational(1) / (smallest * eps);

  std::vector<NodeId> parent(kept.size(), kNoParent);
  std::vector<Weight> weight(kept.size(), 0);
  std::vector<Tokens> demand(kept.size(), 0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    NodeId old = kept[i];
    demand[i] = inst.demand(old);
    if (i == 0) continue;
    parent[i] = new_id[inst.parent(old)];
    Rational scaled = smallest > 0 ? lifted[i] * factor : lifted[i];
    cpp_int q = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
    if (Rational(q) < scaled) q += 1;
    weight[i] = static_cast<Weight>(q);
  }
  return {TreeInstance(inst.capacity(), std::move(parent), std::move(weight), std::move(demand)),
          std::move(kept), factor, floor_weight};
}

Solution merge_light_tours(const TreeInstance& inst, Solution sol) {
  const Tokens q = inst.capacity();
  auto light = [&](const Tour& t) { return 2 * t.load() <= q; };
  for (;;) {
    int first = -1;
    int second = -1;
    for (int i = 0; i < static_cast<int>(sol.tours.size()); ++i) {
      if (!light(sol.tours[i])) continue;
      if (first < 0) {
        first = i;
      } else {
        second = i;
        break;
      }
    }
    if (second < 0) break;
    for (const auto& [node, k] : sol.tours[second].pickups) sol.tours[first].pickups[node] += k;
    sol.tours.erase(sol.tours.begin() + second);
  }
  sol.total_cost = solution_cost(inst, sol);
  return sol;
}

}  // namespace cvrp
