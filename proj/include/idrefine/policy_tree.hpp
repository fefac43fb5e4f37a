#pragma once

// Decision trees as decision functions: internal vertices test an
// informational predecessor, leaves prescribe an action. Values are kept
// normalized to [0, 1].

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "idrefine/diagram.hpp"
#include "idrefine/inference.hpp"

namespace idrefine {

using VertexId = std::size_t;
inline constexpr VertexId kNoVertex = static_cast<VertexId>(-1);

struct Vertex {
  VertexId parent = kNoVertex;
  std::size_t branch = 0;          // parent's outcome leading here
  std::optional<NodeId> variable;  // set once the vertex is internal
  std::vector<VertexId> children;  // one per outcome of `variable`
  double gain = 0.0;               // EVI realised when this vertex was split

  // Leaf data. Internal vertices keep the values they had as leaves.
  std::size_t action = 0;
  double value = 0.0;  // normalized u(action | context)
  double reach = 0.0;  // P(context)
  bool pruned = false;

  bool is_leaf() const { return !variable.has_value(); }
};

class DecisionTree {
 public:
  DecisionTree(const InfluenceDiagram& diagram, NodeId decision,
               ActionValue root);

  NodeId decision() const { return decision_; }
  std::span<const NodeId> predecessors() const { return predecessors_; }

  VertexId root() const { return 0; }
  const Vertex& vertex(VertexId id) const { return vertices_.at(id); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t internal_count() const { return vertices_.size() - leaf_count(); }
  std::size_t leaf_count() const;

  // Leaves in depth-first, outcome order.
  std::vector<VertexId> leaves() const;

  Evidence context(VertexId id) const;
  std::size_t depth(VertexId id) const;

  // Informational predecessors not yet on the path to `id`, in the order the
  // decision lists them.
  std::vector<NodeId> possible_extensions(VertexId id) const;
  bool extensible(VertexId id) const;
  bool complete() const;

  // Predecessors that label some internal vertex, in information-set order.
  std::vector<NodeId> used_predecessors() const;

  // Replaces leaf `id` by an internal vertex on `variable` with the given
  // children (already evaluated). Returns `id`.
  VertexId split(VertexId id, NodeId variable, std::vector<Vertex> children,
                 double gain);

 private:
  NodeId decision_;
  std::vector<NodeId> predecessors_;
  std::vector<Vertex> vertices_;
};

// A single-leaf tree holding the best unconditional action.
// Costs one best_action query.
DecisionTree init_tree(InferenceSession& session, NodeId decision);

// Sum over non-pruned leaves of value * reach.
double tree_value(const DecisionTree& tree);

struct ChildEvaluation {
  std::size_t action = 0;
  double value = 0.0;
  double reach = 0.0;
  bool pruned = false;
};

// The outcome of replacing `leaf` by a test on `variable`, before it is
// applied.
struct ExtensionEvaluation {
  VertexId leaf = kNoVertex;
  NodeId variable = 0;
  std::vector<ChildEvaluation> children;
  double evi = 0.0;
};

// Evaluates the extension given the posterior of `variable` in the leaf's
// context (so batched posteriors can be shared across candidates).
ExtensionEvaluation evaluate_extension(const DecisionTree& tree, VertexId leaf,
                                       NodeId variable,
                                       std::span<const double> posterior,
                                       InferenceSession& session);

// Expected value of improvement of extending `leaf` with `variable`;
// leaves the tree untouched.
double evi(const DecisionTree& tree, VertexId leaf, NodeId variable,
           InferenceSession& session);

struct BestExtension {
  NodeId variable = 0;
  double evi = 0.0;
  // Every evaluated candidate, in possible_extensions order.
  std::vector<ExtensionEvaluation> candidates;

  const ExtensionEvaluation& chosen() const;
};

// Greedy choice: evaluates every possible extension of `leaf` after one
// batched posterior pass. Ties go to the earliest candidate.
BestExtension best_extension(const DecisionTree& tree, VertexId leaf,
                             InferenceSession& session);

// Applies a previously computed evaluation without further queries.
VertexId extend(DecisionTree& tree, const ExtensionEvaluation& evaluation);

// Evaluates and applies in one go.
VertexId extend(DecisionTree& tree, VertexId leaf, NodeId variable,
                InferenceSession& session);

// Action prescribed for a complete information state.
std::size_t apply_policy(const DecisionTree& tree, const Evidence& state);

// Leaf reached by a complete information state.
VertexId policy_leaf(const DecisionTree& tree, const Evidence& state);

struct PolicyRow {
  Evidence state;
  std::size_t action = 0;
  VertexId leaf = kNoVertex;
};

std::vector<PolicyRow> to_table(const DecisionTree& tree,
                                const InfluenceDiagram& diagram);

// {"var":..,"children":{outcome: subtree}} for internal vertices and
// {"action":..,"value":..,"prob":..,"pruned":..} for leaves.
nlohmann::ordered_json tree_to_json(const DecisionTree& tree,
                                    const InfluenceDiagram& diagram);

}  // namespace idrefine
