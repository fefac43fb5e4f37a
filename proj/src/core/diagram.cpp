#include "idrefine/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idrefine/error.hpp"

namespace idrefine {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kChance:
      return "chance";
    case NodeKind::kDecision:
      return "decision";
    case NodeKind::kValue:
      return "value";
  }
  return "?";
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateName:
      return "duplicate-name";
    case ViolationKind::kOutcomes:
      return "outcomes";
    case ViolationKind::kUnresolvedReference:
      return "unresolved-reference";
    case ViolationKind::kValueNodeCount:
      return "value-node-count";
    case ViolationKind::kValueNodeHasChildren:
      return "value-node-has-children";
    case ViolationKind::kTableSize:
      return "table-size";
    case ViolationKind::kRowSum:
      return "row-sum";
    case ViolationKind::kProbabilityRange:
      return "probability-range";
    case ViolationKind::kNonFiniteUtility:
      return "non-finite-utility";
    case ViolationKind::kCycle:
      return "cycle";
    case ViolationKind::kDecisionOrder:
      return "decision-order";
    case ViolationKind::kDecisionTable:
      return "decision-table";
  }
  return "?";
}

// ---------------------------------------------------------------- Evidence

Evidence::Evidence(std::initializer_list<Finding> findings) {
  for (const Finding& f : findings) set(f.variable, f.outcome);
}

void Evidence::set(NodeId variable, std::size_t outcome) {
  auto it = std::lower_bound(
      findings_.begin(), findings_.end(), variable,
      [](const Finding& f, NodeId v) { return f.variable < v; });
  if (it != findings_.end() && it->variable == variable) {
    if (it->outcome != outcome) {
      throw ArgumentError("conflicting findings for variable " +
                          std::to_string(variable));
    }
    return;
  }
  findings_.insert(it, Finding{variable, outcome});
}

void Evidence::erase(NodeId variable) {
  std::erase_if(findings_,
                [&](const Finding& f) { return f.variable == variable; });
}

std::optional<std::size_t> Evidence::get(NodeId variable) const {
  auto it = std::lower_bound(
      findings_.begin(), findings_.end(), variable,
      [](const Finding& f, NodeId v) { return f.variable < v; });
  if (it != findings_.end() && it->variable == variable) return it->outcome;
  return std::nullopt;
}

Evidence Evidence::with(NodeId variable, std::size_t outcome) const {
  Evidence copy = *this;
  copy.set(variable, outcome);
  return copy;
}

// -------------------------------------------------------------- MixedRadix

MixedRadix::MixedRadix(std::vector<std::size_t> radices)
    : radices_(std::move(radices)), strides_(radices_.size(), 1) {
  for (std::size_t i = radices_.size(); i-- > 0;) {
    strides_[i] = size_;
    if (__builtin_mul_overflow(size_, radices_[i], &size_)) {
      throw LimitError("configuration space overflows size_t");
    }
  }
}

std::vector<std::size_t> MixedRadix::digits(std::size_t index) const {
  std::vector<std::size_t> out(radices_.size());
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    out[i] = (index / strides_[i]) % radices_[i];
  }
  return out;
}

std::size_t MixedRadix::index(std::span<const std::size_t> digits) const {
  std::size_t out = 0;
  for (std::size_t i = 0; i < radices_.size(); ++i) {
    out += digits[i] * strides_[i];
  }
  return out;
}

// -------------------------------------------------------- InfluenceDiagram

InfluenceDiagram::InfluenceDiagram(std::vector<Node> nodes,
                                   std::vector<NodeId> decision_order)
    : nodes_(std::move(nodes)), decision_order_(std::move(decision_order)) {}

std::optional<NodeId> InfluenceDiagram::find(std::string_view name) const {
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

NodeId InfluenceDiagram::require(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw ArgumentError("unknown node '" + std::string(name) + "'");
}

NodeId InfluenceDiagram::require_decision(std::string_view name) const {
  NodeId id = require(name);
  if (nodes_[id].kind != NodeKind::kDecision) {
    throw ArgumentError("node '" + std::string(name) + "' is not a decision");
  }
  return id;
}

NodeId InfluenceDiagram::value_node() const {
  std::optional<NodeId> found;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind != NodeKind::kValue) continue;
    if (found) throw ValidationError("diagram has more than one value node");
    found = i;
  }
  if (!found) throw ValidationError("diagram has no value node");
  return *found;
}

std::vector<NodeId> InfluenceDiagram::children(NodeId id) const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const auto& ps = nodes_[i].parents;
    if (std::find(ps.begin(), ps.end(), id) != ps.end()) out.push_back(i);
  }
  return out;
}

MixedRadix InfluenceDiagram::parent_configurations(NodeId id) const {
  std::vector<std::size_t> radices;
  for (NodeId p : nodes_.at(id).parents) radices.push_back(arity(p));
  return MixedRadix(std::move(radices));
}

// ---------------------------------------------------------- DiagramBuilder

std::vector<NodeId> DiagramBuilder::resolve(
    const std::vector<std::string>& names) const {
  std::vector<NodeId> ids;
  for (const auto& name : names) {
    auto it = std::find_if(nodes_.begin(), nodes_.end(),
                           [&](const Node& n) { return n.name == name; });
    if (it == nodes_.end()) {
      throw ArgumentError("unknown parent '" + name + "'");
    }
    ids.push_back(static_cast<NodeId>(it - nodes_.begin()));
  }
  return ids;
}

DiagramBuilder& DiagramBuilder::chance(std::string name,
                                       std::vector<std::string> outcomes,
                                       std::vector<std::string> parents,
                                       std::vector<double> table) {
  nodes_.push_back(Node{std::move(name), NodeKind::kChance, std::move(outcomes),
                        resolve(parents), std::move(table)});
  return *this;
}

DiagramBuilder& DiagramBuilder::decision(
    std::string name, std::vector<std::string> actions,
    std::vector<std::string> information) {
  nodes_.push_back(Node{std::move(name), NodeKind::kDecision,
                        std::move(actions), resolve(information), {}});
  return *this;
}

DiagramBuilder& DiagramBuilder::value(std::string name,
                                      std::vector<std::string> parents,
                                      std::vector<double> utilities) {
  nodes_.push_back(Node{std::move(name), NodeKind::kValue, {}, resolve(parents),
                        std::move(utilities)});
  return *this;
}

DiagramBuilder& DiagramBuilder::order(std::vector<std::string> decisions) {
  order_ = std::move(decisions);
  has_order_ = true;
  return *this;
}

InfluenceDiagram DiagramBuilder::build_unchecked() const {
  std::vector<NodeId> order;
  if (has_order_) {
    order = resolve(order_);
  } else {
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].kind == NodeKind::kDecision) order.push_back(i);
    }
  }
  return InfluenceDiagram(nodes_, std::move(order));
}

InfluenceDiagram DiagramBuilder::build() const {
  InfluenceDiagram diagram = build_unchecked();
  ValidationReport report = validate(diagram);
  if (!report.ok()) throw ValidationError(report.to_string());
  renormalize_rows(diagram);
  return diagram;
}

// -------------------------------------------------------------- validation

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out << "; ";
    out << idrefine::to_string(violations[i].kind) << ": "
        << violations[i].message;
  }
  return out.str();
}

namespace {

// Returns nodes in a topological order, or nullopt when a cycle exists.
// Out-of-range parent references are ignored here.
std::optional<std::vector<NodeId>> topological_order(
    const InfluenceDiagram& diagram) {
  const std::size_t n = diagram.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<NodeId>> kids(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId p : diagram.node(i).parents) {
      if (p >= n) continue;
      ++pending[i];
      kids[p].push_back(i);
    }
  }
  std::vector<NodeId> order;
  std::vector<NodeId> ready;
  for (NodeId i = n; i-- > 0;) {
    if (pending[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    NodeId next = ready.back();
    ready.pop_back();
    order.push_back(next);
    for (NodeId k : kids[next]) {
      if (--pending[k] == 0) ready.push_back(k);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

std::vector<bool> ancestors_of(const InfluenceDiagram& diagram, NodeId id) {
  std::vector<bool> seen(diagram.size(), false);
  std::vector<NodeId> stack(diagram.node(id).parents.begin(),
                            diagram.node(id).parents.end());
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    if (cur >= diagram.size() || seen[cur]) continue;
    seen[cur] = true;
    for (NodeId p : diagram.node(cur).parents) stack.push_back(p);
  }
  return seen;
}

std::string describe_row(const Node& node, std::size_t row) {
  return "node '" + node.name + "' row " + std::to_string(row);
}

}  // namespace

ValidationReport validate(const InfluenceDiagram& diagram) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string message) {
    report.violations.push_back({kind, std::move(message)});
  };

  const std::size_t n = diagram.size();
  std::set<std::string> names;
  bool references_ok = true;
  std::size_t value_nodes = 0;

  for (NodeId i = 0; i < n; ++i) {
    const Node& node = diagram.node(i);
    if (!names.insert(node.name).second) {
      add(ViolationKind::kDuplicateName, "node '" + node.name + "'");
    }
    for (NodeId p : node.parents) {
      if (p >= n) {
        add(ViolationKind::kUnresolvedReference,
            "node '" + node.name + "' has parent index " + std::to_string(p));
        references_ok = false;
      }
    }
    if (node.kind == NodeKind::kValue) {
      ++value_nodes;
      if (!node.outcomes.empty()) {
        add(ViolationKind::kOutcomes,
            "value node '" + node.name + "' must not declare outcomes");
      }
    } else {
      if (node.outcomes.size() < 2) {
        add(ViolationKind::kOutcomes,
            "node '" + node.name + "' needs at least two outcomes");
      }
      std::set<std::string> labels(node.outcomes.begin(), node.outcomes.end());
      if (labels.size() != node.outcomes.size()) {
        add(ViolationKind::kOutcomes,
            "node '" + node.name + "' has duplicate outcome labels");
      }
    }
  }

  if (value_nodes != 1) {
    add(ViolationKind::kValueNodeCount,
        "exactly one value node required, found " +
            std::to_string(value_nodes));
  }

  if (!references_ok) return report;

  for (NodeId i = 0; i < n; ++i) {
    const Node& node = diagram.node(i);
    for (NodeId p : node.parents) {
      if (diagram.node(p).kind == NodeKind::kValue) {
        add(ViolationKind::kValueNodeHasChildren,
            "value node '" + diagram.node(p).name + "' is a parent of '" +
                node.name + "'");
      }
    }
    if (node.kind == NodeKind::kDecision) {
      if (!node.table.empty()) {
        add(ViolationKind::kDecisionTable,
            "decision '" + node.name + "' must not carry a table");
      }
      continue;
    }

    std::size_t configs = 1;
    bool parents_sized = true;
    for (NodeId p : node.parents) {
      if (diagram.node(p).kind == NodeKind::kValue) parents_sized = false;
      configs *= std::max<std::size_t>(diagram.arity(p), 1);
    }
    if (!parents_sized) continue;

    if (node.kind == NodeKind::kValue) {
      if (node.table.size() != configs) {
        add(ViolationKind::kTableSize,
            "value node '" + node.name + "' expects " +
                std::to_string(configs) + " utilities, got " +
                std::to_string(node.table.size()));
        continue;
      }
      for (double u : node.table) {
        if (!std::isfinite(u)) {
          add(ViolationKind::kNonFiniteUtility,
              "value node '" + node.name + "'");
          break;
        }
      }
      continue;
    }

    const std::size_t k = node.outcomes.size();
    if (k == 0 || node.table.size() != configs * k) {
      add(ViolationKind::kTableSize,
          "node '" + node.name + "' expects " + std::to_string(configs * k) +
              " entries, got " + std::to_string(node.table.size()));
      continue;
    }
    for (std::size_t row = 0; row < configs; ++row) {
      double sum = 0.0;
      bool in_range = true;
      for (std::size_t j = 0; j < k; ++j) {
        double p = node.table[row * k + j];
        if (!(p >= 0.0 && p <= 1.0)) in_range = false;
        sum += p;
      }
      if (!in_range) {
        add(ViolationKind::kProbabilityRange, describe_row(node, row));
      } else if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream msg;
        msg << describe_row(node, row) << " sums to " << sum;
        add(ViolationKind::kRowSum, msg.str());
      }
    }
  }

  const bool acyclic = topological_order(diagram).has_value();
  if (!acyclic) add(ViolationKind::kCycle, "arc graph contains a cycle");

  // decision_order: every decision exactly once, nothing else, and
  // consistent with the arcs.
  std::vector<std::size_t> position(n, static_cast<std::size_t>(-1));
  const auto order = diagram.decision_order();
  for (std::size_t k = 0; k < order.size(); ++k) {
    NodeId d = order[k];
    if (d >= n || diagram.node(d).kind != NodeKind::kDecision) {
      add(ViolationKind::kDecisionOrder,
          "decision_order entry " + std::to_string(k) + " is not a decision");
      continue;
    }
    if (position[d] != static_cast<std::size_t>(-1)) {
      add(ViolationKind::kDecisionOrder,
          "decision '" + diagram.node(d).name + "' listed twice");
    }
    position[d] = k;
  }
  for (NodeId i = 0; i < n; ++i) {
    if (diagram.node(i).kind == NodeKind::kDecision &&
        position[i] == static_cast<std::size_t>(-1)) {
      add(ViolationKind::kDecisionOrder,
          "decision '" + diagram.node(i).name + "' missing from decision_order");
    }
  }
  if (acyclic) {
    for (NodeId d : order) {
      if (d >= n || diagram.node(d).kind != NodeKind::kDecision) continue;
      auto anc = ancestors_of(diagram, d);
      for (NodeId e : order) {
        if (e < n && anc[e] && position[e] > position[d]) {
          add(ViolationKind::kDecisionOrder,
              "decision '" + diagram.node(e).name + "' precedes '" +
                  diagram.node(d).name + "' in the graph but not in the order");
        }
      }
    }
  }
  return report;
}

void renormalize_rows(InfluenceDiagram& diagram) {
  for (NodeId i = 0; i < diagram.size(); ++i) {
    Node& node = diagram.mutable_node(i);
    if (node.kind != NodeKind::kChance || node.outcomes.empty()) continue;
    const std::size_t k = node.outcomes.size();
    for (std::size_t row = 0; row * k < node.table.size(); ++row) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += node.table[row * k + j];
      if (std::abs(sum - 1.0) <= 1e-12 || sum <= 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) node.table[row * k + j] /= sum;
    }
  }
}

// ------------------------------------------------------------------ JSON

namespace {

const Json& require_field(const Json& obj, const char* key,
                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

std::vector<std::string> string_list(const Json& value,
                                     const std::string& where) {
  if (!value.is_array()) throw ParseError(where + ": expected an array");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ParseError(where + ": expected an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

InfluenceDiagram parse_diagram_unchecked(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError("syntax error at byte " + std::to_string(e.byte) + ": " +
                         e.what(),
                     e.byte);
  }
  if (!doc.is_object()) throw ParseError("diagram must be a JSON object");
  const Json& jnodes = require_field(doc, "nodes", "diagram");
  if (!jnodes.is_array()) throw ParseError("'nodes' must be an array");

  std::map<std::string, NodeId> ids;
  std::vector<Node> nodes;
  std::vector<std::vector<std::string>> parent_names;
  for (std::size_t i = 0; i < jnodes.size(); ++i) {
    const Json& jn = jnodes[i];
    std::string where = "nodes[" + std::to_string(i) + "]";
    if (!jn.is_object()) throw ParseError(where + ": expected an object");
    const Json& jname = require_field(jn, "name", where);
    if (!jname.is_string()) throw ParseError(where + ": 'name' must be a string");
    Node node;
    node.name = jname.get<std::string>();
    where = "node '" + node.name + "'";
    if (!ids.emplace(node.name, nodes.size()).second) {
      throw ParseError("duplicate node name '" + node.name + "'");
    }
    const Json& jkind = require_field(jn, "kind", where);
    const std::string kind = jkind.is_string() ? jkind.get<std::string>() : "";
    if (kind == "chance") {
      node.kind = NodeKind::kChance;
    } else if (kind == "decision") {
      node.kind = NodeKind::kDecision;
    } else if (kind == "value") {
      node.kind = NodeKind::kValue;
    } else {
      throw ParseError(where + ": 'kind' must be chance, decision or value");
    }
    if (auto it = jn.find("outcomes"); it != jn.end()) {
      node.outcomes = string_list(*it, where + " outcomes");
    } else if (node.kind != NodeKind::kValue) {
      throw ParseError(where + ": missing field 'outcomes'");
    }
    if (auto it = jn.find("parents"); it != jn.end()) {
      parent_names.push_back(string_list(*it, where + " parents"));
    } else {
      parent_names.emplace_back();
    }
    if (auto it = jn.find("table"); it != jn.end()) {
      if (!it->is_array()) throw ParseError(where + ": 'table' must be an array");
      for (const auto& x : *it) {
        if (!x.is_number()) {
          throw ParseError(where + ": 'table' must contain numbers");
        }
        node.table.push_back(x.get<double>());
      }
    } else if (node.kind != NodeKind::kDecision) {
      throw ParseError(where + ": missing field 'table'");
    }
    nodes.push_back(std::move(node));
  }

  auto lookup = [&](const std::string& name, const std::string& where) {
    auto it = ids.find(name);
    if (it == ids.end()) {
      throw ParseError(where + ": unresolved reference '" + name + "'");
    }
    return it->second;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& p : parent_names[i]) {
      nodes[i].parents.push_back(lookup(p, "node '" + nodes[i].name + "'"));
    }
  }

  std::vector<NodeId> order;
  if (auto it = doc.find("decision_order"); it != doc.end()) {
    for (const auto& name : string_list(*it, "decision_order")) {
      order.push_back(lookup(name, "decision_order"));
    }
  } else {
    for (NodeId i = 0; i < nodes.size(); ++i) {
      if (nodes[i].kind == NodeKind::kDecision) order.push_back(i);
    }
  }
  return InfluenceDiagram(std::move(nodes), std::move(order));
}

InfluenceDiagram parse_diagram(std::string_view text) {
  InfluenceDiagram diagram = parse_diagram_unchecked(text);
  ValidationReport report = validate(diagram);
  if (!report.ok()) throw ValidationError(report.to_string());
  renormalize_rows(diagram);
  return diagram;
}

std::string serialize_diagram(const InfluenceDiagram& diagram) {
  OrderedJson doc;
  OrderedJson jnodes = OrderedJson::array();
  for (const Node& node : diagram.nodes()) {
    OrderedJson jn;
    jn["name"] = node.name;
    jn["kind"] = std::string(to_string(node.kind));
    if (node.kind != NodeKind::kValue) jn["outcomes"] = node.outcomes;
    OrderedJson parents = OrderedJson::array();
    for (NodeId p : node.parents) parents.push_back(diagram.node(p).name);
    jn["parents"] = std::move(parents);
    if (node.kind != NodeKind::kDecision) jn["table"] = node.table;
    jnodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(jnodes);
  OrderedJson order = OrderedJson::array();
  for (NodeId d : diagram.decision_order()) {
    order.push_back(diagram.node(d).name);
  }
  doc["decision_order"] = std::move(order);
  return doc.dump(1) + "\n";
}

// ------------------------------------------------------ information states

InformationStates::InformationStates(const InfluenceDiagram& diagram,
                                     NodeId decision)
    : predecessors_(diagram.node(decision).parents),
      radix_(diagram.parent_configurations(decision)) {}

Evidence InformationStates::at(std::size_t index) const {
  Evidence out;
  auto digits = radix_.digits(index);
  for (std::size_t i = 0; i < predecessors_.size(); ++i) {
    out.set(predecessors_[i], digits[i]);
  }
  return out;
}

std::size_t InformationStates::index_of(const Evidence& state) const {
  std::vector<std::size_t> digits;
  for (NodeId p : predecessors_) {
    auto v = state.get(p);
    if (!v) throw ArgumentError("information state is incomplete");
    digits.push_back(*v);
  }
  return radix_.index(digits);
}

InformationStates information_states(const InfluenceDiagram& diagram,
                                     NodeId decision) {
  if (decision >= diagram.size() ||
      diagram.node(decision).kind != NodeKind::kDecision) {
    throw ArgumentError("information_states: node is not a decision");
  }
  return InformationStates(diagram, decision);
}

}  // namespace idrefine
