#include "idrefine/inference.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "idrefine/error.hpp"

namespace idrefine {

// ------------------------------------------------------------ compilation

ChanceNetwork::ChanceNetwork(std::shared_ptr<const InfluenceDiagram> diagram,
                             FixedPolicies fixed)
    : diagram_(std::move(diagram)), fixed_(std::move(fixed)) {
  const InfluenceDiagram& id = *diagram_;
  proxy_ = id.value_node();
  const Node& value = id.node(proxy_);
  u_min_ = *std::min_element(value.table.begin(), value.table.end());
  u_max_ = *std::max_element(value.table.begin(), value.table.end());

  variables_.resize(id.size());
  for (NodeId v = 0; v < id.size(); ++v) {
    const Node& node = id.node(v);
    Variable& var = variables_[v];
    switch (node.kind) {
      case NodeKind::kChance:
        var.arity = node.outcomes.size();
        var.parents = node.parents;
        var.cpt = node.table;
        break;
      case NodeKind::kDecision:
        var.arity = node.outcomes.size();
        if (auto it = fixed_.find(v); it != fixed_.end()) {
          var.parents = it->second.parents;
          var.cpt = it->second.table;
        } else {
          var.cpt.assign(var.arity, 1.0 / static_cast<double>(var.arity));
        }
        break;
      case NodeKind::kValue:
        var.arity = 2;
        var.parents = node.parents;
        var.cpt.reserve(2 * node.table.size());
        for (double u : node.table) {
          double p = degenerate() ? 0.5 : (u - u_min_) / (u_max_ - u_min_);
          var.cpt.push_back(p);
          var.cpt.push_back(1.0 - p);
        }
        break;
    }
  }
}

double ChanceNetwork::normalize(double raw) const {
  if (degenerate()) return 0.5;
  return (raw - u_min_) / (u_max_ - u_min_);
}

double ChanceNetwork::denormalize(double normalized) const {
  return normalized * (u_max_ - u_min_) + u_min_;
}

ChanceNetwork compile_network(const InfluenceDiagram& diagram,
                              FixedPolicies fixed) {
  return compile_network(std::make_shared<const InfluenceDiagram>(diagram),
                         std::move(fixed));
}

ChanceNetwork compile_network(std::shared_ptr<const InfluenceDiagram> diagram,
                              FixedPolicies fixed) {
  ValidationReport report = validate(*diagram);
  if (!report.ok()) throw ValidationError(report.to_string());

  // Fixed decisions must form a trailing run of decision_order.
  const auto order = diagram->decision_order();
  std::size_t first_fixed = order.size();
  for (std::size_t k = order.size(); k-- > 0;) {
    if (!fixed.contains(order[k])) break;
    first_fixed = k;
  }
  for (std::size_t k = 0; k < first_fixed; ++k) {
    if (fixed.contains(order[k])) {
      throw ArgumentError("fixed policy for '" + diagram->node(order[k]).name +
                          "' precedes an unfixed decision");
    }
  }
  for (const auto& [d, table] : fixed) {
    if (d >= diagram->size() ||
        diagram->node(d).kind != NodeKind::kDecision) {
      throw ArgumentError("fixed policy keyed by a non-decision node");
    }
    const Node& node = diagram->node(d);
    std::size_t rows = 1;
    for (NodeId p : table.parents) {
      if (std::find(node.parents.begin(), node.parents.end(), p) ==
          node.parents.end()) {
        throw ArgumentError("policy for '" + node.name +
                            "' uses a variable outside its information set");
      }
      rows *= diagram->arity(p);
    }
    if (table.table.size() != rows * node.outcomes.size()) {
      throw ArgumentError("contingency table for '" + node.name +
                          "' has the wrong size");
    }
  }
  return ChanceNetwork(std::move(diagram), std::move(fixed));
}

// ------------------------------------------------------ variable elimination

namespace {

// Table over a list of variables; the first variable varies slowest.
struct Factor {
  std::vector<NodeId> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  std::size_t position(NodeId v) const {
    auto it = std::find(vars.begin(), vars.end(), v);
    return it == vars.end() ? npos : static_cast<std::size_t>(it - vars.begin());
  }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> strides(cards.size(), 1);
  std::size_t s = 1;
  for (std::size_t i = cards.size(); i-- > 0;) {
    strides[i] = s;
    s *= cards[i];
  }
  return strides;
}

// Walks every assignment of `cards` in index order, maintaining the linear
// offsets into up to two source factors.
Factor product(const Factor& a, const Factor& b) {
  Factor out;
  out.vars = a.vars;
  out.cards = a.cards;
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    if (out.position(b.vars[i]) == Factor::npos) {
      out.vars.push_back(b.vars[i]);
      out.cards.push_back(b.cards[i]);
    }
  }
  const auto sa = strides_of(a.cards);
  const auto sb = strides_of(b.cards);
  std::vector<std::size_t> step_a(out.vars.size(), 0);
  std::vector<std::size_t> step_b(out.vars.size(), 0);
  for (std::size_t i = 0; i < out.vars.size(); ++i) {
    if (auto p = a.position(out.vars[i]); p != Factor::npos) step_a[i] = sa[p];
    if (auto p = b.position(out.vars[i]); p != Factor::npos) step_b[i] = sb[p];
  }
  std::size_t total = 1;
  for (auto c : out.cards) total *= c;
  out.values.resize(total);

  std::vector<std::size_t> digit(out.vars.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    out.values[idx] = a.values[ia] * b.values[ib];
    for (std::size_t i = out.vars.size(); i-- > 0;) {
      if (++digit[i] < out.cards[i]) {
        ia += step_a[i];
        ib += step_b[i];
        break;
      }
      digit[i] = 0;
      ia -= step_a[i] * (out.cards[i] - 1);
      ib -= step_b[i] * (out.cards[i] - 1);
    }
  }
  return out;
}

Factor sum_out(const Factor& f, NodeId var) {
  const std::size_t pos = f.position(var);
  Factor out;
  for (std::size_t i = 0; i < f.vars.size(); ++i) {
    if (i == pos) continue;
    out.vars.push_back(f.vars[i]);
    out.cards.push_back(f.cards[i]);
  }
  const auto strides = strides_of(f.cards);
  const std::size_t outer = f.values.size() / (f.cards[pos] * strides[pos]);
  const std::size_t inner = strides[pos];
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < f.cards[pos]; ++k) {
      const double* src = &f.values[(o * f.cards[pos] + k) * inner];
      double* dst = &out.values[o * inner];
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  return out;
}

// Restricts the factor to the evidence, dropping observed variables.
Factor reduce(const Factor& f, const Evidence& evidence) {
  Factor out;
  std::vector<std::size_t> fixed_digit(f.vars.size(), Factor::npos);
  for (std::size_t i = 0; i < f.vars.size(); ++i) {
    if (auto v = evidence.get(f.vars[i])) {
      fixed_digit[i] = *v;
    } else {
      out.vars.push_back(f.vars[i]);
      out.cards.push_back(f.cards[i]);
    }
  }
  if (out.vars.size() == f.vars.size()) return f;
  std::size_t total = 1;
  for (auto c : out.cards) total *= c;
  out.values.resize(total);
  const auto strides = strides_of(f.cards);
  std::size_t base = 0;
  for (std::size_t i = 0; i < f.vars.size(); ++i) {
    if (fixed_digit[i] != Factor::npos) base += fixed_digit[i] * strides[i];
  }
  std::vector<std::size_t> free_strides;
  for (std::size_t i = 0; i < f.vars.size(); ++i) {
    if (fixed_digit[i] == Factor::npos) free_strides.push_back(strides[i]);
  }
  std::vector<std::size_t> digit(out.vars.size(), 0);
  std::size_t src = base;
  for (std::size_t idx = 0; idx < total; ++idx) {
    out.values[idx] = f.values[src];
    for (std::size_t i = out.vars.size(); i-- > 0;) {
      if (++digit[i] < out.cards[i]) {
        src += free_strides[i];
        break;
      }
      digit[i] = 0;
      src -= free_strides[i] * (out.cards[i] - 1);
    }
  }
  return out;
}

// Reorders the factor's variables to `order` (a permutation of f.vars).
std::vector<double> arrange(const Factor& f, std::span<const NodeId> order) {
  std::vector<std::size_t> cards;
  std::vector<std::size_t> step;
  const auto strides = strides_of(f.cards);
  for (NodeId v : order) {
    const std::size_t p = f.position(v);
    cards.push_back(f.cards[p]);
    step.push_back(strides[p]);
  }
  std::vector<double> out(f.values.size());
  std::vector<std::size_t> digit(order.size(), 0);
  std::size_t src = 0;
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    out[idx] = f.values[src];
    for (std::size_t i = order.size(); i-- > 0;) {
      if (++digit[i] < cards[i]) {
        src += step[i];
        break;
      }
      digit[i] = 0;
      src -= step[i] * (cards[i] - 1);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- session

InferenceSession::InferenceSession(const ChanceNetwork& network)
    : network_(&network) {}

std::vector<double> InferenceSession::joint(std::span<const NodeId> targets,
                                            const Evidence& evidence) const {
  const ChanceNetwork& net = *network_;
  const std::size_t n = net.size();
  for (NodeId t : targets) {
    if (t >= n) throw ArgumentError("query target out of range");
    if (evidence.contains(t)) {
      throw ArgumentError("query target is also observed");
    }
  }
  for (const Finding& f : evidence.findings()) {
    if (f.variable >= n || f.outcome >= net.arity(f.variable)) {
      throw ArgumentError("finding out of range");
    }
  }

  // Only ancestors of the query and the evidence matter; everything else is
  // barren and sums to one.
  std::vector<bool> relevant(n, false);
  std::vector<NodeId> stack(targets.begin(), targets.end());
  for (const Finding& f : evidence.findings()) stack.push_back(f.variable);
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    if (relevant[v]) continue;
    relevant[v] = true;
    for (NodeId p : net.parents(v)) stack.push_back(p);
  }

  std::vector<Factor> factors;
  for (NodeId v = 0; v < n; ++v) {
    if (!relevant[v]) continue;
    Factor f;
    for (NodeId p : net.parents(v)) {
      f.vars.push_back(p);
      f.cards.push_back(net.arity(p));
    }
    f.vars.push_back(v);
    f.cards.push_back(net.arity(v));
    auto cpt = net.cpt(v);
    f.values.assign(cpt.begin(), cpt.end());
    factors.push_back(reduce(f, evidence));
  }

  std::vector<NodeId> hidden;
  for (NodeId v = 0; v < n; ++v) {
    if (relevant[v] && !evidence.contains(v) &&
        std::find(targets.begin(), targets.end(), v) == targets.end()) {
      hidden.push_back(v);
    }
  }

  // Greedy elimination: always remove the variable whose merged factor is
  // smallest.
  while (!hidden.empty()) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < hidden.size(); ++h) {
      std::vector<NodeId> scope;
      for (const Factor& f : factors) {
        if (f.position(hidden[h]) == Factor::npos) continue;
        for (NodeId v : f.vars) {
          if (std::find(scope.begin(), scope.end(), v) == scope.end()) {
            scope.push_back(v);
          }
        }
      }
      double cost = 1.0;
      for (NodeId v : scope) cost *= static_cast<double>(net.arity(v));
      if (cost < best_cost) {
        best_cost = cost;
        best = h;
      }
    }
    const NodeId var = hidden[best];
    hidden.erase(hidden.begin() + static_cast<std::ptrdiff_t>(best));

    std::optional<Factor> merged;
    std::vector<Factor> rest;
    for (Factor& f : factors) {
      if (f.position(var) == Factor::npos) {
        rest.push_back(std::move(f));
      } else {
        merged = merged ? product(*merged, f) : std::move(f);
      }
    }
    if (merged) rest.push_back(sum_out(*merged, var));
    factors = std::move(rest);
  }

  Factor result{{}, {}, {1.0}};
  for (const Factor& f : factors) result = product(result, f);
  return arrange(result, targets);
}

double InferenceSession::context_probability(const Evidence& context) const {
  if (context.empty()) return 1.0;
  auto p = joint({}, context);
  return p.at(0);
}

double InferenceSession::expected_value() const {
  const NodeId proxy = network_->utility_proxy();
  return joint(std::span<const NodeId>(&proxy, 1), Evidence{}).at(kProxyTrue);
}

void InferenceSession::require_open_decision(NodeId decision,
                                             const Evidence& context) const {
  const InfluenceDiagram& diagram = network_->diagram();
  if (decision >= diagram.size() ||
      diagram.node(decision).kind != NodeKind::kDecision) {
    throw ArgumentError("best_action: node is not a decision");
  }
  if (network_->is_compiled(decision)) {
    throw ArgumentError("best_action: decision '" +
                        diagram.node(decision).name +
                        "' already has a fixed policy");
  }
  if (context.contains(decision) ||
      context.contains(network_->utility_proxy())) {
    throw ArgumentError("best_action: context observes the query variables");
  }
}

namespace {

// Picks the action maximizing P(d=a, v'=true, ...) from a slab laid out as
// [action][proxy], first-declared action on ties.
ActionValue select_action(std::span<const double> slab, std::size_t actions) {
  double total_true = 0.0;
  for (std::size_t a = 0; a < actions; ++a) total_true += slab[2 * a + kProxyTrue];
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t a = 0; a < actions; ++a) {
    double score = total_true > 0.0 ? slab[2 * a + kProxyTrue] / total_true : 0.0;
    if (score > best_score + kTieTolerance) {
      best = a;
      best_score = score;
    }
  }
  const double mass = slab[2 * best] + slab[2 * best + 1];
  if (!(mass > 0.0)) {
    throw ZeroProbabilityError("selected action has zero probability");
  }
  return {best, slab[2 * best + kProxyTrue] / mass};
}

}  // namespace

ActionValue InferenceSession::best_action(NodeId decision,
                                          const Evidence& context) {
  require_open_decision(decision, context);
  const NodeId targets[] = {decision, network_->utility_proxy()};
  auto j = joint(targets, context);
  counter_.passes += 2;
  counter_.fine += 2;
  counter_.action_queries += 2;
  const double p_context = std::accumulate(j.begin(), j.end(), 0.0);
  if (p_context < kImpossibleThreshold) {
    throw ZeroProbabilityError("best_action: impossible context");
  }
  return select_action(j, network_->arity(decision));
}

std::vector<double> InferenceSession::posterior(NodeId variable,
                                                const Evidence& context) {
  return posteriors(std::span<const NodeId>(&variable, 1), context).front();
}

std::vector<std::vector<double>> InferenceSession::posteriors(
    std::span<const NodeId> variables, const Evidence& context) {
  std::vector<std::vector<double>> out;
  out.reserve(variables.size());
  for (NodeId x : variables) {
    auto j = joint(std::span<const NodeId>(&x, 1), context);
    const double total = std::accumulate(j.begin(), j.end(), 0.0);
    if (total < kImpossibleThreshold) {
      throw ZeroProbabilityError("posterior: impossible context");
    }
    for (double& p : j) p /= total;
    counter_.fine += j.size();
    out.push_back(std::move(j));
  }
  counter_.passes += 1;
  return out;
}

std::vector<std::optional<ActionValue>> InferenceSession::split_actions(
    NodeId decision, NodeId variable, const Evidence& context,
    std::span<const bool> skip) {
  require_open_decision(decision, context);
  if (context.contains(variable) || variable == decision) {
    throw ArgumentError("split_actions: variable already in context");
  }
  const std::size_t outcomes = network_->arity(variable);
  const std::size_t actions = network_->arity(decision);
  const NodeId targets[] = {variable, decision, network_->utility_proxy()};
  auto j = joint(targets, context);

  std::vector<std::optional<ActionValue>> out(outcomes);
  std::uint64_t evaluated = 0;
  for (std::size_t k = 0; k < outcomes; ++k) {
    if (k < skip.size() && skip[k]) continue;
    std::span<const double> slab(&j[k * actions * 2], actions * 2);
    const double p_child = std::accumulate(slab.begin(), slab.end(), 0.0);
    if (p_child < kImpossibleThreshold) continue;
    out[k] = select_action(slab, actions);
    ++evaluated;
  }
  if (evaluated > 0) counter_.passes += 2;
  counter_.fine += 2 * evaluated;
  counter_.action_queries += 2 * evaluated;
  return out;
}

}  // namespace idrefine
