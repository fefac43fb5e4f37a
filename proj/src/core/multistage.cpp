#include "idrefine/multistage.hpp"

#include <algorithm>

#include "idrefine/error.hpp"

namespace idrefine {

ContingencyTable contingency_table(const DecisionTree& tree,
                                   const InfluenceDiagram& diagram) {
  ContingencyTable out;
  out.parents = tree.used_predecessors();
  const std::size_t actions = diagram.arity(tree.decision());
  std::vector<std::size_t> radices;
  for (NodeId p : out.parents) radices.push_back(diagram.arity(p));
  MixedRadix rows(radices);
  out.table.assign(rows.size() * actions, 0.0);

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto digits = rows.digits(r);
    VertexId id = tree.root();
    while (!tree.vertex(id).is_leaf()) {
      const Vertex& v = tree.vertex(id);
      auto pos = std::find(out.parents.begin(), out.parents.end(), *v.variable);
      id = v.children.at(digits[static_cast<std::size_t>(pos - out.parents.begin())]);
    }
    const Vertex& leaf = tree.vertex(id);
    double* row = &out.table[r * actions];
    if (leaf.pruned) {
      std::fill(row, row + actions, 1.0 / static_cast<double>(actions));
    } else {
      row[leaf.action] = 1.0;
    }
  }
  return out;
}

ChanceNetwork compile_decision(const ChanceNetwork& network, NodeId decision,
                               const DecisionTree& tree) {
  const InfluenceDiagram& diagram = network.diagram();
  if (tree.decision() != decision) {
    throw ArgumentError("tree belongs to a different decision");
  }
  const auto& info = diagram.node(decision).parents;
  for (VertexId id = 0; id < tree.vertex_count(); ++id) {
    const auto& var = tree.vertex(id).variable;
    if (var && std::find(info.begin(), info.end(), *var) == info.end()) {
      throw ArgumentError("tree tests a variable outside the information set");
    }
  }
  FixedPolicies fixed = network.fixed_policies();
  fixed[decision] = contingency_table(tree, diagram);
  return compile_network(network.shared_diagram(), std::move(fixed));
}

SweepResult sweep_back(const InfluenceDiagram& diagram,
                       const StageConfig& config) {
  auto shared = std::make_shared<const InfluenceDiagram>(diagram);
  ChanceNetwork network = compile_network(shared);
  const auto order = diagram.decision_order();
  if (order.empty()) throw ArgumentError("diagram has no decisions");

  std::vector<CompiledPolicy> policies;
  std::vector<StageResult> stages;
  QueryCounter total;
  for (std::size_t k = order.size(); k-- > 0;) {
    const NodeId d = order[k];
    RefinementResult run = refine_policy(network, d, config(d));
    network = compile_decision(network, d, run.tree);

    CompiledPolicy compiled{d, run.tree, run.tree.used_predecessors(),
                            network.fixed_policies().at(d)};
    policies.push_back(std::move(compiled));
    stages.push_back(
        StageResult{d, std::move(run.trace), run.counter, run.reason});
    total.fine += run.counter.fine;
    total.passes += run.counter.passes;
    total.action_queries += run.counter.action_queries;
  }
  std::reverse(policies.begin(), policies.end());

  InferenceSession session(network);
  MultistagePolicy policy;
  policy.policies = std::move(policies);
  policy.value = session.expected_value();
  policy.value_raw = network.denormalize(policy.value);
  return SweepResult{std::move(policy), std::move(stages), total,
                     std::move(network)};
}

SweepResult sweep_back(const InfluenceDiagram& diagram,
                       const RefinementConfig& config) {
  return sweep_back(diagram, [&](NodeId) { return config; });
}

nlohmann::ordered_json policy_to_json(const MultistagePolicy& policy,
                                      const InfluenceDiagram& diagram) {
  nlohmann::ordered_json out;
  nlohmann::ordered_json decisions = nlohmann::ordered_json::array();
  for (const CompiledPolicy& p : policy.policies) {
    nlohmann::ordered_json jp;
    jp["decision"] = diagram.node(p.decision).name;
    nlohmann::ordered_json used = nlohmann::ordered_json::array();
    for (NodeId u : p.used_predecessors) used.push_back(diagram.node(u).name);
    jp["used_predecessors"] = std::move(used);
    jp["tree"] = tree_to_json(p.tree, diagram);
    decisions.push_back(std::move(jp));
  }
  out["decisions"] = std::move(decisions);
  out["value_normalized"] = policy.value;
  out["value_raw"] = policy.value_raw;
  return out;
}

}  // namespace idrefine
