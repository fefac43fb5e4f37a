#pragma once

// Sweep-back over several decisions: refine the last decision, fix it in the
// network as a contingency table over the predecessors its tree actually
// tests, then move to the decision before it. Decisions not yet processed
// act as uniform random choices.

#include <functional>
#include <map>
#include <vector>

#include <json.hpp>

#include "idrefine/inference.hpp"
#include "idrefine/policy_tree.hpp"
#include "idrefine/refine.hpp"

namespace idrefine {

struct CompiledPolicy {
  NodeId decision = 0;
  DecisionTree tree;
  std::vector<NodeId> used_predecessors;
  ContingencyTable contingency;
};

struct MultistagePolicy {
  std::vector<CompiledPolicy> policies;  // decision_order
  double value = 0.0;                    // normalized
  double value_raw = 0.0;
};

// Contingency table consistent with `tree`: one-hot on the tree's action for
// reachable contexts, uniform where the reached leaf is pruned.
ContingencyTable contingency_table(const DecisionTree& tree,
                                   const InfluenceDiagram& diagram);

// Returns a network in which `decision` acts according to `tree`. Throws
// ArgumentError if the tree tests a variable outside the decision's
// information set or a later decision is still free.
ChanceNetwork compile_decision(const ChanceNetwork& network, NodeId decision,
                               const DecisionTree& tree);

struct StageResult {
  NodeId decision = 0;
  AnytimeTrace trace;
  QueryCounter counter;
  StopReason reason = StopReason::kComplete;
};

struct SweepResult {
  MultistagePolicy policy;
  std::vector<StageResult> stages;  // in processing order (last decision first)
  QueryCounter total;
  ChanceNetwork network;            // every decision compiled
};

// Refinement settings for one decision.
using StageConfig = std::function<RefinementConfig(NodeId decision)>;

SweepResult sweep_back(const InfluenceDiagram& diagram,
                       const StageConfig& config);
SweepResult sweep_back(const InfluenceDiagram& diagram,
                       const RefinementConfig& config);

// {"decisions":[{"decision":..,"used_predecessors":[..],"tree":..}],
//  "value_normalized":..,"value_raw":..}
nlohmann::ordered_json policy_to_json(const MultistagePolicy& policy,
                                      const InfluenceDiagram& diagram);

}  // namespace idrefine
