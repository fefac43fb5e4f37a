#pragma once

// Exact inference over the chance network derived from an influence diagram.
//
// Decisions that have no fixed policy become uniform root chance nodes and
// the value node becomes a binary utility proxy whose probability of `true`
// is the normalized utility of its parent configuration. Queries are
// answered by variable elimination and counted with two conventions: `fine`
// counts extracted posteriors, `passes` counts evidence-conditioned
// propagations.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "idrefine/diagram.hpp"

namespace idrefine {

// A context whose probability falls below this is treated as impossible.
inline constexpr double kImpossibleThreshold = 1e-12;

// Two action scores closer than this (in normalized units) tie, and the
// first-declared action wins.
inline constexpr double kTieTolerance = 1e-12;

// Outcome index of `true` on the utility proxy.
inline constexpr std::size_t kProxyTrue = 0;

struct QueryCounter {
  std::uint64_t fine = 0;
  std::uint64_t passes = 0;
  // Share of `fine` spent on best-action and value queries (the rest are
  // observable posteriors).
  std::uint64_t action_queries = 0;

  bool operator==(const QueryCounter&) const = default;
};

// Deterministic (or uniform, for unreachable rows) CPT that fixes a decision
// inside the network.
struct ContingencyTable {
  std::vector<NodeId> parents;
  std::vector<double> table;  // row-major over parents, actions fastest

  bool operator==(const ContingencyTable&) const = default;
};

using FixedPolicies = std::map<NodeId, ContingencyTable>;

class ChanceNetwork {
 public:
  ChanceNetwork(std::shared_ptr<const InfluenceDiagram> diagram,
                FixedPolicies fixed);

  const InfluenceDiagram& diagram() const { return *diagram_; }
  const std::shared_ptr<const InfluenceDiagram>& shared_diagram() const {
    return diagram_;
  }

  // Variables share ids with diagram nodes; the value node's id names the
  // utility proxy.
  std::size_t size() const { return variables_.size(); }
  std::size_t arity(NodeId v) const { return variables_.at(v).arity; }
  std::span<const NodeId> parents(NodeId v) const {
    return variables_.at(v).parents;
  }
  std::span<const double> cpt(NodeId v) const { return variables_.at(v).cpt; }
  NodeId utility_proxy() const { return proxy_; }

  double utility_min() const { return u_min_; }
  double utility_max() const { return u_max_; }
  // All utilities equal: every policy is optimal and values read 0.5.
  bool degenerate() const { return !(u_max_ > u_min_); }
  double normalize(double raw) const;
  double denormalize(double normalized) const;

  bool is_compiled(NodeId decision) const {
    return fixed_.contains(decision);
  }
  const FixedPolicies& fixed_policies() const { return fixed_; }

 private:
  struct Variable {
    std::size_t arity = 0;
    std::vector<NodeId> parents;
    std::vector<double> cpt;
  };

  std::shared_ptr<const InfluenceDiagram> diagram_;
  FixedPolicies fixed_;
  std::vector<Variable> variables_;
  NodeId proxy_ = 0;
  double u_min_ = 0.0;
  double u_max_ = 0.0;
};

// Throws ValidationError for an invalid diagram and ArgumentError when the
// fixed policies are not a trailing run of decision_order or reference
// variables outside the decision's information set.
ChanceNetwork compile_network(const InfluenceDiagram& diagram,
                              FixedPolicies fixed = {});
ChanceNetwork compile_network(std::shared_ptr<const InfluenceDiagram> diagram,
                              FixedPolicies fixed = {});

struct ActionValue {
  std::size_t action = 0;
  double value = 0.0;  // normalized expected utility of `action`
};

// Per-run query state over a shared, immutable network. Not thread-safe;
// use one session per thread.
class InferenceSession {
 public:
  explicit InferenceSession(const ChanceNetwork& network);

  const ChanceNetwork& network() const { return *network_; }

  // argmax_a P(d=a | v'=true, context) and P(v'=true | d=a*, context).
  // Costs 2 passes and 2 fine queries. Throws ZeroProbabilityError when the
  // context is impossible.
  ActionValue best_action(NodeId decision, const Evidence& context);

  // Exact P(x | context). Costs 1 pass and |Ω_x| fine queries.
  std::vector<double> posterior(NodeId variable, const Evidence& context);

  // Posteriors of several variables under one context: 1 pass total.
  std::vector<std::vector<double>> posteriors(std::span<const NodeId> variables,
                                              const Evidence& context);

  // Best action and value in every context x_j·context not marked in `skip`
  // and not impossible. Costs 2 passes (one selection sweep, one value sweep)
  // and 2 fine queries per evaluated child.
  std::vector<std::optional<ActionValue>> split_actions(
      NodeId decision, NodeId variable, const Evidence& context,
      std::span<const bool> skip = {});

  // P(context); 1 for empty evidence. Not counted.
  double context_probability(const Evidence& context) const;

  // P(v'=true) with no evidence: the normalized value of acting by the fixed
  // policies (uniformly elsewhere). Not counted.
  double expected_value() const;

  // Unnormalized P(targets, evidence) laid out as a MixedRadix over the
  // targets (first slowest). Not counted.
  std::vector<double> joint(std::span<const NodeId> targets,
                            const Evidence& evidence) const;

  const QueryCounter& counter() const { return counter_; }
  void reset_counter() { counter_ = {}; }

 private:
  void require_open_decision(NodeId decision, const Evidence& context) const;

  const ChanceNetwork* network_;
  QueryCounter counter_;
};

}  // namespace idrefine
