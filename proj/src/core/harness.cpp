#include "idrefine/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "idrefine/error.hpp"
#include "idrefine/rng.hpp"

namespace idrefine {

// ----------------------------------------------------------------- fixtures

InfluenceDiagram mini_weather() {
  return DiagramBuilder()
      .chance("W", {"sun", "rain"}, {}, {0.7, 0.3})
      .chance("R", {"sunny", "rainy"}, {"W"}, {0.9, 0.1, 0.2, 0.8})
      .decision("D", {"take", "leave"}, {"R"})
      .value("U", {"W", "D"}, {20, 100, 70, 0})
      .build();
}

InfluenceDiagram mini_weather_coin() {
  return DiagramBuilder()
      .chance("W", {"sun", "rain"}, {}, {0.7, 0.3})
      .chance("R", {"sunny", "rainy"}, {"W"}, {0.9, 0.1, 0.2, 0.8})
      .chance("coin", {"heads", "tails"}, {}, {0.5, 0.5})
      .decision("D", {"take", "leave"}, {"R", "coin"})
      .value("U", {"W", "D"}, {20, 100, 70, 0})
      .build();
}

InfluenceDiagram weather3() {
  return DiagramBuilder()
      .chance("Weather", {"sun", "rain"}, {}, {0.7, 0.3})
      .chance("Report", {"sunny", "cloudy", "rainy"}, {"Weather"},
              {0.7, 0.2, 0.1, 0.15, 0.25, 0.6})
      .chance("View", {"sunny", "cloudy", "rainy"}, {"Weather"},
              {0.6, 0.3, 0.1, 0.1, 0.3, 0.6})
      .decision("Umbrella", {"take", "leave"}, {"Report", "View"})
      .value("Satisfaction", {"Weather", "Umbrella"}, {20, 100, 70, 0})
      .build();
}

InfluenceDiagram exclusion_fixture() {
  return DiagramBuilder()
      .chance("H", {"h0", "h1"}, {}, {0.5, 0.5})
      .chance("A", {"a0", "a1"}, {"H"}, {0.8, 0.2, 0.3, 0.7})
      .chance("B", {"b0", "b1"}, {"A"}, {1.0, 0.0, 0.0, 1.0})
      .chance("C", {"c0", "c1"}, {"H"}, {0.6, 0.4, 0.1, 0.9})
      .decision("D", {"d0", "d1"}, {"A", "B", "C"})
      .value("V", {"H", "D"}, {10, 0, 2, 8})
      .build();
}

namespace {

struct TopologyNode {
  const char* name;
  NodeKind kind;
  std::vector<std::string> outcomes;
  std::vector<std::string> parents;
};

const std::vector<TopologyNode>& car_buyer_topology() {
  static const std::vector<TopologyNode> nodes = {
      {"Condition", NodeKind::kChance, {"peach", "lemon"}, {}},
      {"Test1",
       NodeKind::kDecision,
       {"no_test", "steering", "fuel_electrical", "transmission"},
       {}},
      {"Result1",
       NodeKind::kChance,
       {"no_result", "zero_defects", "one_defect", "two_defects"},
       {"Condition", "Test1"}},
      {"Test2", NodeKind::kDecision, {"no_test", "differential"},
       {"Test1", "Result1"}},
      {"Result2",
       NodeKind::kChance,
       {"no_result", "zero_defects", "one_defect"},
       {"Condition", "Test2"}},
      {"Buy",
       NodeKind::kDecision,
       {"buy", "buy_with_guarantee", "dont_buy"},
       {"Test1", "Result1", "Test2", "Result2"}},
      {"Value", NodeKind::kValue, {}, {"Condition", "Test1", "Test2", "Buy"}},
  };
  return nodes;
}

}  // namespace

InfluenceDiagram car_buyer_structure() {
  DiagramBuilder b;
  for (const TopologyNode& t : car_buyer_topology()) {
    std::size_t rows = 1;
    for (const auto& p : t.parents) {
      for (const TopologyNode& q : car_buyer_topology()) {
        if (p == q.name) rows *= q.outcomes.size();
      }
    }
    switch (t.kind) {
      case NodeKind::kChance: {
        const double u = 1.0 / static_cast<double>(t.outcomes.size());
        b.chance(t.name, t.outcomes, t.parents,
                 std::vector<double>(rows * t.outcomes.size(), u));
        break;
      }
      case NodeKind::kDecision:
        b.decision(t.name, t.outcomes, t.parents);
        break;
      case NodeKind::kValue:
        b.value(t.name, t.parents, std::vector<double>(rows, 0.0));
        break;
    }
  }
  b.order({"Test1", "Test2", "Buy"});
  return b.build();
}

std::vector<std::string> car_buyer_mismatches(const InfluenceDiagram& diagram) {
  std::vector<std::string> out;
  const auto& topology = car_buyer_topology();
  if (diagram.size() != topology.size()) {
    out.push_back("expected " + std::to_string(topology.size()) +
                  " nodes, found " + std::to_string(diagram.size()));
  }
  for (const TopologyNode& t : topology) {
    auto id = diagram.find(t.name);
    if (!id) {
      out.push_back(std::string("missing node ") + t.name);
      continue;
    }
    const Node& n = diagram.node(*id);
    if (n.kind != t.kind) {
      out.push_back(std::string(t.name) + ": wrong kind");
    }
    if (n.outcomes.size() != t.outcomes.size()) {
      out.push_back(std::string(t.name) + ": expected " +
                    std::to_string(t.outcomes.size()) + " outcomes");
    }
    std::vector<std::string> parents;
    for (NodeId p : n.parents) parents.push_back(diagram.node(p).name);
    if (parents != t.parents) {
      out.push_back(std::string(t.name) + ": parents differ");
    }
  }
  std::vector<std::string> order;
  for (NodeId d : diagram.decision_order()) order.push_back(diagram.node(d).name);
  if (order != std::vector<std::string>{"Test1", "Test2", "Buy"}) {
    out.push_back("decision order must be Test1, Test2, Buy");
  }
  return out;
}

InfluenceDiagram load_car_buyer(std::string_view text) {
  InfluenceDiagram diagram = parse_diagram(text);
  auto problems = car_buyer_mismatches(diagram);
  if (!problems.empty()) {
    std::string msg = "not a Car Buyer diagram:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return diagram;
}

std::vector<std::string_view> fixture_names() {
  return {"mini-weather", "mini-weather-coin", "weather3", "exclusion",
          "car-buyer-structure"};
}

InfluenceDiagram fixture(std::string_view name) {
  if (name == "mini-weather") return mini_weather();
  if (name == "mini-weather-coin") return mini_weather_coin();
  if (name == "weather3") return weather3();
  if (name == "exclusion") return exclusion_fixture();
  if (name == "car-buyer-structure") return car_buyer_structure();
  throw ArgumentError("unknown fixture: " + std::string(name));
}

// --------------------------------------------------------------- generators

namespace {

std::vector<std::string> labels(const char* prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(prefix + std::to_string(i));
  }
  return out;
}

// One distribution over `arity` outcomes.
void draw_row(Rng& rng, std::size_t arity, std::vector<double>& table) {
  if (arity == 2) {
    const double p = rng.uniform_open();
    table.push_back(p);
    table.push_back(1.0 - p);
    return;
  }
  std::vector<double> w(arity);
  double total = 0.0;
  for (double& x : w) {
    x = rng.uniform_open();
    total += x;
  }
  for (double x : w) table.push_back(x / total);
}

std::vector<double> draw_table(Rng& rng, std::size_t rows, std::size_t arity) {
  std::vector<double> table;
  for (std::size_t r = 0; r < rows; ++r) draw_row(rng, arity, table);
  return table;
}

std::vector<double> draw_utilities(Rng& rng, std::size_t count) {
  std::vector<double> u(count);
  for (double& x : u) x = rng.uniform();
  return u;
}

void check_spec(const GeneratorSpec& spec) {
  if (spec.n < 1) throw ArgumentError("generator needs n >= 1");
  if (spec.arity < 2) throw ArgumentError("generator needs arity >= 2");
}

}  // namespace

InfluenceDiagram gen_random_id(const GeneratorSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);
  DiagramBuilder b;
  std::vector<std::string> names;
  std::size_t configs = 2;
  for (std::size_t k = 1; k <= spec.n; ++k) {
    names.push_back("c" + std::to_string(k));
    b.chance(names.back(), labels("o", spec.arity), {},
             draw_table(rng, 1, spec.arity));
    if (configs > std::numeric_limits<std::size_t>::max() / spec.arity) {
      throw LimitError("utility table too large");
    }
    configs *= spec.arity;
  }
  b.decision("d", {"a0", "a1"}, names);
  std::vector<std::string> value_parents = names;
  value_parents.push_back("d");
  b.value("v", value_parents, draw_utilities(rng, configs));
  return b.build();
}

InfluenceDiagram gen_two_stage(const GeneratorSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);
  DiagramBuilder b;
  b.chance("h", {"h0", "h1"}, {}, draw_table(rng, 1, 2));
  std::vector<std::string> obs;
  for (std::size_t i = 1; i <= spec.n; ++i) {
    obs.push_back("o" + std::to_string(i));
    b.chance(obs.back(), labels("o", spec.arity), {"h"},
             draw_table(rng, 2, spec.arity));
  }
  b.decision("d1", {"a0", "a1"}, obs);
  b.chance("r", {"r0", "r1"}, {"h", "d1"}, draw_table(rng, 4, 2));
  std::vector<std::string> info = obs;
  info.push_back("d1");
  info.push_back("r");
  b.decision("d2", {"a0", "a1"}, info);
  b.value("v", {"h", "d1", "d2"}, draw_utilities(rng, 8));
  b.order({"d1", "d2"});
  return b.build();
}

// ------------------------------------------------------------------ oracles

namespace {

// Walks every configuration of the non-value nodes in lexicographic order
// (node-id order, first slowest) with its probability weight and raw
// utility. `target` gets weight factor 1 so its actions can be compared.
class JointWalk {
 public:
  JointWalk(const InfluenceDiagram& diagram, const FixedPolicies& fixed,
            std::optional<NodeId> target, std::size_t cap)
      : diagram_(diagram), fixed_(fixed), target_(target) {
    const ValidationReport report = validate(diagram);
    if (!report.ok()) throw ValidationError(report.to_string());
    value_ = diagram.value_node();
    position_.assign(diagram.size(), kAbsent);
    std::size_t total = 1;
    for (NodeId id = 0; id < diagram.size(); ++id) {
      if (id == value_) continue;
      const std::size_t a = diagram.arity(id);
      if (total > cap / a) {
        throw LimitError("joint enumeration exceeds " + std::to_string(cap) +
                         " configurations");
      }
      total *= a;
      position_[id] = vars_.size();
      vars_.push_back(id);
    }
    total_ = total;
    for (const auto& [d, ct] : fixed) {
      if (diagram.node(d).kind != NodeKind::kDecision) {
        throw ArgumentError("fixed policy on a non-decision");
      }
      std::size_t rows = 1;
      for (NodeId p : ct.parents) rows *= diagram.arity(p);
      if (ct.table.size() != rows * diagram.arity(d)) {
        throw ArgumentError("contingency table has the wrong size");
      }
    }
    const auto& utilities = diagram.node(value_).table;
    u_min_ = *std::min_element(utilities.begin(), utilities.end());
    u_max_ = *std::max_element(utilities.begin(), utilities.end());
  }

  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }
  std::size_t position(NodeId id) const { return position_[id]; }

  double normalize_sum(double raw, double mass) const {
    if (!(u_max_ > u_min_)) return 0.5 * mass;
    return (raw - u_min_ * mass) / (u_max_ - u_min_);
  }

  template <typename Visit>
  void run(Visit visit) const {
    std::vector<std::size_t> digits(vars_.size(), 0);
    for (std::size_t i = 0; i < total_; ++i) {
      double w = 1.0;
      for (std::size_t k = 0; k < vars_.size() && w != 0.0; ++k) {
        w *= factor(vars_[k], digits);
      }
      if (w != 0.0) {
        const Node& v = diagram_.node(value_);
        visit(digits, w, v.table[row(v.parents, digits)]);
      }
      for (std::size_t k = vars_.size(); k-- > 0;) {
        if (++digits[k] < diagram_.arity(vars_[k])) break;
        digits[k] = 0;
      }
    }
  }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

  std::size_t row(const std::vector<NodeId>& parents,
                  const std::vector<std::size_t>& digits) const {
    std::size_t r = 0;
    for (NodeId p : parents) r = r * diagram_.arity(p) + digits[position_[p]];
    return r;
  }

  double factor(NodeId id, const std::vector<std::size_t>& digits) const {
    const Node& n = diagram_.node(id);
    const std::size_t own = digits[position_[id]];
    const std::size_t a = n.outcomes.size();
    if (n.kind == NodeKind::kChance) {
      return n.table[row(n.parents, digits) * a + own];
    }
    if (target_ && *target_ == id) return 1.0;
    auto it = fixed_.find(id);
    if (it == fixed_.end()) return 1.0 / static_cast<double>(a);
    return it->second.table[row(it->second.parents, digits) * a + own];
  }

  const InfluenceDiagram& diagram_;
  const FixedPolicies& fixed_;
  std::optional<NodeId> target_;
  NodeId value_ = 0;
  std::vector<NodeId> vars_;
  std::vector<std::size_t> position_;
  std::size_t total_ = 0;
  double u_min_ = 0.0;
  double u_max_ = 0.0;
};

}  // namespace

double OracleResult::policy_value(std::span<const std::size_t> policy) const {
  if (policy.size() != joint_values.size()) {
    throw ArgumentError("policy table has the wrong number of states");
  }
  double v = 0.0;
  for (std::size_t s = 0; s < policy.size(); ++s) {
    v += joint_values[s].at(policy[s]);
  }
  return v;
}

std::vector<std::vector<std::size_t>> OracleResult::optimal_actions() const {
  std::vector<std::vector<std::size_t>> out(joint_values.size());
  for (std::size_t s = 0; s < joint_values.size(); ++s) {
    const auto& row = joint_values[s];
    const double p = state_probabilities[s];
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (p <= 0.0 ||
          row[a] / p >= per_state_values[s] - kTieTolerance) {
        out[s].push_back(a);
      }
    }
  }
  return out;
}

ContingencyTable OracleResult::contingency(
    const InfluenceDiagram& diagram) const {
  ContingencyTable ct;
  ct.parents = diagram.node(decision).parents;
  const std::size_t actions = diagram.arity(decision);
  ct.table.assign(table.size() * actions, 0.0);
  for (std::size_t s = 0; s < table.size(); ++s) {
    ct.table[s * actions + table[s]] = 1.0;
  }
  return ct;
}

OracleResult oracle_optimal(const InfluenceDiagram& diagram, NodeId decision,
                            const FixedPolicies& fixed, std::size_t cap) {
  if (diagram.node(decision).kind != NodeKind::kDecision) {
    throw ArgumentError(diagram.node(decision).name + " is not a decision");
  }
  if (fixed.contains(decision)) {
    throw ArgumentError(diagram.node(decision).name + " is already fixed");
  }
  const auto order = diagram.decision_order();
  auto at = std::find(order.begin(), order.end(), decision);
  for (auto it = at + 1; it < order.end(); ++it) {
    if (!fixed.contains(*it)) {
      throw ArgumentError("later decision " + diagram.node(*it).name +
                          " has no fixed policy");
    }
  }

  JointWalk walk(diagram, fixed, decision, cap);
  const auto& preds = diagram.node(decision).parents;
  const std::size_t actions = diagram.arity(decision);
  const std::size_t states = information_states(diagram, decision).size();
  std::vector<std::vector<double>> raw(states, std::vector<double>(actions));
  std::vector<std::vector<double>> mass(states, std::vector<double>(actions));
  const std::size_t own = walk.position(decision);

  walk.run([&](const std::vector<std::size_t>& digits, double w, double u) {
    std::size_t s = 0;
    for (NodeId p : preds) s = s * diagram.arity(p) + digits[walk.position(p)];
    raw[s][digits[own]] += w * u;
    mass[s][digits[own]] += w;
  });

  OracleResult r;
  r.decision = decision;
  r.table.assign(states, 0);
  r.per_state_values.assign(states, 0.0);
  r.state_probabilities.assign(states, 0.0);
  r.joint_values.assign(states, std::vector<double>(actions, 0.0));
  for (std::size_t s = 0; s < states; ++s) {
    const double p = mass[s][0];
    r.state_probabilities[s] = p;
    for (std::size_t a = 0; a < actions; ++a) {
      r.joint_values[s][a] = walk.normalize_sum(raw[s][a], mass[s][a]);
    }
    if (p <= 0.0) continue;
    std::size_t best = 0;
    double best_score = r.joint_values[s][0] / p;
    for (std::size_t a = 1; a < actions; ++a) {
      const double score = r.joint_values[s][a] / p;
      if (score > best_score + kTieTolerance) {
        best = a;
        best_score = score;
      }
    }
    r.table[s] = best;
    r.per_state_values[s] = best_score;
    r.value += r.joint_values[s][best];
    r.value_raw += raw[s][best];
  }
  return r;
}

double enumerated_value(const InfluenceDiagram& diagram,
                        const FixedPolicies& fixed, std::size_t cap) {
  JointWalk walk(diagram, fixed, std::nullopt, cap);
  double raw = 0.0;
  double mass = 0.0;
  walk.run([&](const std::vector<std::size_t>&, double w, double u) {
    raw += w * u;
    mass += w;
  });
  return walk.normalize_sum(raw, mass);
}

MultistageOracleResult oracle_optimal_multistage(
    const InfluenceDiagram& diagram, std::size_t cap) {
  const auto order = diagram.decision_order();
  if (order.empty()) throw ArgumentError("diagram has no decisions");
  MultistageOracleResult out;
  FixedPolicies fixed;
  for (std::size_t k = order.size(); k-- > 0;) {
    OracleResult r = oracle_optimal(diagram, order[k], fixed, cap);
    fixed[order[k]] = r.contingency(diagram);
    out.stages.push_back(std::move(r));
  }
  std::reverse(out.stages.begin(), out.stages.end());
  out.value = out.stages.front().value;
  out.value_raw = out.stages.front().value_raw;
  return out;
}

namespace {

class MinimalTree {
 public:
  MinimalTree(const InfluenceDiagram& diagram, NodeId decision,
              const OracleResult& oracle, std::size_t cap)
      : actions_(diagram.arity(decision)) {
    for (NodeId p : diagram.node(decision).parents) {
      arity_.push_back(diagram.arity(p));
    }
    std::size_t codes = 1;
    for (std::size_t a : arity_) {
      if (codes > cap / (a + 1)) {
        throw LimitError("too many partial contexts for tree search");
      }
      codes *= a + 1;
    }
    MixedRadix states(arity_);
    const auto optimal = oracle.optimal_actions();
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (oracle.state_probabilities[s] < kImpossibleThreshold) continue;
      reachable_.push_back(states.digits(s));
      std::vector<char> ok(actions_, 0);
      for (std::size_t a : optimal[s]) ok[a] = 1;
      optimal_.push_back(std::move(ok));
    }
  }

  std::size_t solve() {
    std::vector<std::size_t> all(reachable_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::vector<std::size_t> context(arity_.size(), kUnset);
    return solve(context, all);
  }

 private:
  static constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

  std::size_t code(const std::vector<std::size_t>& context) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < context.size(); ++i) {
      c = c * (arity_[i] + 1) + (context[i] == kUnset ? 0 : context[i] + 1);
    }
    return c;
  }

  std::size_t solve(std::vector<std::size_t>& context,
                    const std::vector<std::size_t>& members) {
    if (members.empty()) return 0;
    const std::size_t key = code(context);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    std::vector<char> common(actions_, 1);
    for (std::size_t m : members) {
      for (std::size_t a = 0; a < actions_; ++a) common[a] &= optimal_[m][a];
    }
    std::size_t best = 0;
    if (std::find(common.begin(), common.end(), 1) == common.end()) {
      best = std::numeric_limits<std::size_t>::max();
      for (std::size_t i = 0; i < arity_.size(); ++i) {
        if (context[i] != kUnset) continue;
        std::size_t total = 1;
        for (std::size_t j = 0; j < arity_[i] && total < best; ++j) {
          std::vector<std::size_t> sub;
          for (std::size_t m : members) {
            if (reachable_[m][i] == j) sub.push_back(m);
          }
          context[i] = j;
          total += solve(context, sub);
        }
        context[i] = kUnset;
        best = std::min(best, total);
      }
    }
    memo_[key] = best;
    return best;
  }

  std::size_t actions_;
  std::vector<std::size_t> arity_;
  std::vector<std::vector<std::size_t>> reachable_;
  std::vector<std::vector<char>> optimal_;
  std::unordered_map<std::size_t, std::size_t> memo_;
};

}  // namespace

std::size_t minimal_tree_size(const InfluenceDiagram& diagram, NodeId decision,
                              const FixedPolicies& fixed, std::size_t cap) {
  const OracleResult oracle = oracle_optimal(diagram, decision, fixed, cap);
  return MinimalTree(diagram, decision, oracle, cap).solve();
}

// ----------------------------------------------------------------- profiles

std::size_t baseline_count(const InfluenceDiagram& diagram, NodeId decision) {
  return information_states(diagram, decision).size();
}

double query_bound(std::size_t predecessors, std::size_t arity) {
  const double b = static_cast<double>(arity);
  return 2.0 * b / ((b - 1.0) * (b - 1.0)) *
         std::pow(b, static_cast<double>(predecessors + 1));
}

std::size_t max_predecessor_arity(const InfluenceDiagram& diagram,
                                  NodeId decision) {
  std::size_t b = 0;
  for (NodeId p : diagram.node(decision).parents) {
    b = std::max(b, diagram.arity(p));
  }
  return b == 0 ? 2 : b;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& x) {
  return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json();
}

}  // namespace

ProfileReport run_profile(const InfluenceDiagram& diagram, NodeId decision,
                          const RefinementConfig& config, std::size_t cap) {
  ChanceNetwork network = compile_network(diagram);
  ProfileReport report{refine_policy(network, decision, config), std::nullopt, {}};
  std::string oracle_note = "oracle disabled";
  if (cap > 0) {
    try {
      report.oracle = oracle_optimal(diagram, decision, {}, cap);
      oracle_note.clear();
    } catch (const Error& e) {
      oracle_note = e.what();
    }
  }

  const RefinementResult& run = report.run;
  const double value = tree_value(run.tree);
  const std::size_t n = diagram.node(decision).parents.size();
  const std::size_t b = max_predecessor_arity(diagram, decision);
  const double bound = query_bound(n, b);

  auto& s = report.summary;
  s["decision"] = diagram.node(decision).name;
  s["leaf_strategy"] = to_string(config.leaf);
  s["extension_strategy"] = to_string(config.extension);
  s["seed"] = config.seed;
  s["stop_reason"] = to_string(run.reason);
  s["complete"] = run.tree.complete();
  s["internal_vertices"] = run.tree.internal_count();
  s["leaves"] = run.tree.leaf_count();
  s["trace_rows"] = run.trace.records.size();
  s["first_tree_passes"] = run.trace.records.front().passes;
  s["final_value_normalized"] = value;
  s["final_value_raw"] = network.denormalize(value);
  std::optional<double> oracle_value, oracle_raw, gap;
  if (report.oracle) {
    oracle_value = report.oracle->value;
    oracle_raw = report.oracle->value_raw;
    gap = report.oracle->value - value;
  }
  s["oracle_value_normalized"] = optional_number(oracle_value);
  s["oracle_value_raw"] = optional_number(oracle_raw);
  s["oracle_gap"] = optional_number(gap);
  if (!oracle_note.empty()) s["oracle_note"] = oracle_note;
  s["fine_queries"] = run.counter.fine;
  s["passes"] = run.counter.passes;
  s["action_queries"] = run.counter.action_queries;
  s["baseline_bn_computations"] = baseline_count(diagram, decision);
  s["predecessors"] = n;
  s["max_arity"] = b;
  s["query_bound"] = bound;
  s["query_bound_held"] =
      static_cast<double>(run.counter.action_queries) < bound;
  return report;
}

SweepReport run_sweep_profile(const InfluenceDiagram& diagram,
                              const StageConfig& config, std::size_t cap) {
  SweepReport report{sweep_back(diagram, config), std::nullopt, {}};
  std::string oracle_note = "oracle disabled";
  if (cap > 0) {
    try {
      report.oracle = oracle_optimal_multistage(diagram, cap);
      oracle_note.clear();
    } catch (const Error& e) {
      oracle_note = e.what();
    }
  }

  const SweepResult& sw = report.sweep;
  auto& s = report.summary;
  std::size_t baseline = 0;
  for (NodeId d : diagram.decision_order()) baseline += baseline_count(diagram, d);
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const StageResult& st : sw.stages) {
    const CompiledPolicy* policy = nullptr;
    for (const auto& p : sw.policy.policies) {
      if (p.decision == st.decision) policy = &p;
    }
    nlohmann::ordered_json js;
    js["decision"] = diagram.node(st.decision).name;
    js["stop_reason"] = to_string(st.reason);
    js["internal_vertices"] = policy->tree.internal_count();
    js["leaves"] = policy->tree.leaf_count();
    js["fine_queries"] = st.counter.fine;
    js["passes"] = st.counter.passes;
    js["action_queries"] = st.counter.action_queries;
    js["baseline_bn_computations"] = baseline_count(diagram, st.decision);
    stages.push_back(std::move(js));
  }
  s["stages"] = std::move(stages);
  s["final_value_normalized"] = sw.policy.value;
  s["final_value_raw"] = sw.policy.value_raw;
  std::optional<double> oracle_value, oracle_raw, gap;
  if (report.oracle) {
    oracle_value = report.oracle->value;
    oracle_raw = report.oracle->value_raw;
    gap = report.oracle->value - sw.policy.value;
  }
  s["oracle_value_normalized"] = optional_number(oracle_value);
  s["oracle_value_raw"] = optional_number(oracle_raw);
  s["oracle_gap"] = optional_number(gap);
  if (!oracle_note.empty()) s["oracle_note"] = oracle_note;
  s["fine_queries"] = sw.total.fine;
  s["passes"] = sw.total.passes;
  s["action_queries"] = sw.total.action_queries;
  s["baseline_bn_computations"] = baseline;
  return report;
}

}  // namespace idrefine
