#pragma once

// Influence diagrams with discrete chance, decision and value nodes.
//
// Tables are row-major over parent configurations: parents vary slowest-first
// in their listed order and, for chance nodes, the child outcome varies
// fastest. Value nodes carry raw utilities, one per parent configuration.

#include <compare>
#include <initializer_list>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idrefine {

using NodeId = std::size_t;

enum class NodeKind { kChance, kDecision, kValue };

std::string_view to_string(NodeKind kind);

struct Node {
  std::string name;
  NodeKind kind = NodeKind::kChance;
  std::vector<std::string> outcomes;  // empty for the value node
  std::vector<NodeId> parents;
  std::vector<double> table;  // CPT, utilities, or empty for decisions

  bool operator==(const Node&) const = default;
};

// One variable fixed to one of its outcomes (by index into Node::outcomes).
struct Finding {
  NodeId variable = 0;
  std::size_t outcome = 0;

  auto operator<=>(const Finding&) const = default;
};

// A set of findings, at most one per variable, kept sorted by variable.
class Evidence {
 public:
  Evidence() = default;
  Evidence(std::initializer_list<Finding> findings);

  // Adds a finding; throws ArgumentError if the variable already has a
  // different outcome.
  void set(NodeId variable, std::size_t outcome);
  void erase(NodeId variable);
  std::optional<std::size_t> get(NodeId variable) const;
  bool contains(NodeId variable) const { return get(variable).has_value(); }

  std::span<const Finding> findings() const { return findings_; }
  std::size_t size() const { return findings_.size(); }
  bool empty() const { return findings_.empty(); }

  Evidence with(NodeId variable, std::size_t outcome) const;

  bool operator==(const Evidence&) const = default;

 private:
  std::vector<Finding> findings_;
};

// Counter over a fixed list of radices; the first digit varies slowest.
class MixedRadix {
 public:
  explicit MixedRadix(std::vector<std::size_t> radices);

  std::size_t size() const { return size_; }
  std::span<const std::size_t> radices() const { return radices_; }
  std::vector<std::size_t> digits(std::size_t index) const;
  std::size_t index(std::span<const std::size_t> digits) const;

 private:
  std::vector<std::size_t> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

class InfluenceDiagram {
 public:
  InfluenceDiagram() = default;
  InfluenceDiagram(std::vector<Node> nodes, std::vector<NodeId> decision_order);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }
  std::size_t arity(NodeId id) const { return nodes_.at(id).outcomes.size(); }

  std::optional<NodeId> find(std::string_view name) const;
  // Like find, but throws ArgumentError for unknown names.
  NodeId require(std::string_view name) const;
  // Throws ArgumentError unless `name` is a decision node.
  NodeId require_decision(std::string_view name) const;

  std::span<const NodeId> decision_order() const { return decision_order_; }

  // The unique value node; throws ValidationError when there is not exactly
  // one.
  NodeId value_node() const;

  std::vector<NodeId> children(NodeId id) const;

  // Mixed-radix layout of the node's parent configurations.
  MixedRadix parent_configurations(NodeId id) const;

  Node& mutable_node(NodeId id) { return nodes_.at(id); }

  bool operator==(const InfluenceDiagram&) const = default;

 private:
  std::vector<Node> nodes_;
  std::vector<NodeId> decision_order_;
};

// Incremental construction by name; parents must be added first.
class DiagramBuilder {
 public:
  DiagramBuilder& chance(std::string name, std::vector<std::string> outcomes,
                         std::vector<std::string> parents,
                         std::vector<double> table);
  DiagramBuilder& decision(std::string name, std::vector<std::string> actions,
                           std::vector<std::string> information);
  DiagramBuilder& value(std::string name, std::vector<std::string> parents,
                        std::vector<double> utilities);
  DiagramBuilder& order(std::vector<std::string> decisions);

  // Builds without checking invariants; see validate().
  InfluenceDiagram build_unchecked() const;
  // Builds, validates, and renormalizes CPT rows; throws ValidationError.
  InfluenceDiagram build() const;

 private:
  std::vector<NodeId> resolve(const std::vector<std::string>& names) const;

  std::vector<Node> nodes_;
  std::vector<std::string> order_;
  bool has_order_ = false;
};

enum class ViolationKind {
  kDuplicateName,
  kOutcomes,
  kUnresolvedReference,
  kValueNodeCount,
  kValueNodeHasChildren,
  kTableSize,
  kRowSum,
  kProbabilityRange,
  kNonFiniteUtility,
  kCycle,
  kDecisionOrder,
  kDecisionTable,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string to_string() const;
};

inline constexpr double kRowSumTolerance = 1e-9;

ValidationReport validate(const InfluenceDiagram& diagram);

// Rescales every CPT row to sum to one. Rows already within 1e-12 of one are
// left untouched so the operation is idempotent.
void renormalize_rows(InfluenceDiagram& diagram);

// Parses the JSON diagram format and resolves references. Throws ParseError
// on syntax errors, unknown references, duplicate names, or wrong field types.
InfluenceDiagram parse_diagram_unchecked(std::string_view text);

// parse_diagram_unchecked followed by validate(); throws ValidationError
// listing every violation, then renormalizes CPT rows.
InfluenceDiagram parse_diagram(std::string_view text);

std::string serialize_diagram(const InfluenceDiagram& diagram);

// Complete assignments to the decision's informational predecessors, in
// lexicographic order over the parents as listed.
class InformationStates {
 public:
  InformationStates(const InfluenceDiagram& diagram, NodeId decision);

  std::size_t size() const { return radix_.size(); }
  Evidence at(std::size_t index) const;
  std::size_t index_of(const Evidence& state) const;
  std::span<const NodeId> predecessors() const { return predecessors_; }

 private:
  std::vector<NodeId> predecessors_;
  MixedRadix radix_;
};

// Throws ArgumentError when `decision` is not a decision node.
InformationStates information_states(const InfluenceDiagram& diagram,
                                     NodeId decision);

}  // namespace idrefine
