#pragma once

// Fixtures, seeded problem generators, brute-force oracles and experiment
// profiles. The oracles enumerate the full joint distribution straight from
// the diagram tables and never use the inference engine.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "idrefine/diagram.hpp"
#include "idrefine/inference.hpp"
#include "idrefine/multistage.hpp"
#include "idrefine/refine.hpp"

namespace idrefine {

// ----------------------------------------------------------------- fixtures

// W{sun,rain} -> R{sunny,rainy} -> D{take,leave}; U(W, D).
InfluenceDiagram mini_weather();

// mini_weather plus an irrelevant fair coin that D also observes.
InfluenceDiagram mini_weather_coin();

// Weather{sun,rain} with two three-outcome observations, Report and View,
// both informing Umbrella{take,leave}; Satisfaction(Weather, Umbrella).
InfluenceDiagram weather3();

// Hidden H, observable A, B (a deterministic copy of A) and C informing D.
// Contexts holding A and B with different outcomes are impossible.
InfluenceDiagram exclusion_fixture();

// Car Buyer topology with placeholder numbers: uniform CPTs, zero utilities.
InfluenceDiagram car_buyer_structure();

// Differences between `diagram` and the Car Buyer topology (names, kinds,
// arities, parents, decision order); empty when it matches.
std::vector<std::string> car_buyer_mismatches(const InfluenceDiagram& diagram);

// Parses a full Car Buyer diagram; throws ValidationError when its topology
// differs from car_buyer_structure().
InfluenceDiagram load_car_buyer(std::string_view text);

std::vector<std::string_view> fixture_names();
// Throws ArgumentError for unknown names.
InfluenceDiagram fixture(std::string_view name);

// --------------------------------------------------------------- generators

struct GeneratorSpec {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::size_t arity = 2;  // outcomes per chance predecessor
};

// n parentless chance nodes c1..cn, all observed by decision d{a0,a1} and
// all parents of v together with d. Draws, in order: each c_k's
// distribution (binary: P(first) ~ U(0,1); otherwise normalized U(0,1)
// weights), then utilities U[0,1) row-major over (c1..cn, d).
InfluenceDiagram gen_random_id(const GeneratorSpec& spec);

// Two decisions with no forgetting: hidden h, observations o1..on | h,
// d1 observes o*, result r | h, d1, d2 observes o*, d1, r, and v(h, d1, d2).
// Draws in declaration order, then utilities row-major.
InfluenceDiagram gen_two_stage(const GeneratorSpec& spec);

// ------------------------------------------------------------------ oracles

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

struct OracleResult {
  NodeId decision = 0;
  std::vector<std::size_t> table;  // best action per information state
  double value = 0.0;              // normalized
  double value_raw = 0.0;
  std::vector<double> per_state_values;     // normalized, given the state
  std::vector<double> state_probabilities;
  // P(state) * E[u | state, action], normalized; [state][action].
  std::vector<std::vector<double>> joint_values;

  // Normalized value of an arbitrary tabular decision function.
  double policy_value(std::span<const std::size_t> table) const;
  // Actions within the tie tolerance of the best, per state.
  std::vector<std::vector<std::size_t>> optimal_actions() const;
  // The table as a one-hot contingency table over every predecessor.
  ContingencyTable contingency(const InfluenceDiagram& diagram) const;
};

// Exact optimum for `decision` by enumerating the joint distribution.
// Decisions in `fixed` follow their tables, every later decision must be
// fixed, and earlier ones act uniformly. Throws LimitError above `cap`
// joint configurations.
OracleResult oracle_optimal(const InfluenceDiagram& diagram, NodeId decision,
                            const FixedPolicies& fixed = {},
                            std::size_t cap = kDefaultEnumerationCap);

// Normalized expected utility with `fixed` decisions following their tables
// and the rest uniform.
double enumerated_value(const InfluenceDiagram& diagram,
                        const FixedPolicies& fixed = {},
                        std::size_t cap = kDefaultEnumerationCap);

struct MultistageOracleResult {
  std::vector<OracleResult> stages;  // decision_order
  double value = 0.0;
  double value_raw = 0.0;
};

// Backward induction over full information states, last decision first.
MultistageOracleResult oracle_optimal_multistage(
    const InfluenceDiagram& diagram, std::size_t cap = kDefaultEnumerationCap);

// Fewest internal vertices of a tree that prescribes an optimal action in
// every reachable information state (impossible states are free).
std::size_t minimal_tree_size(const InfluenceDiagram& diagram, NodeId decision,
                              const FixedPolicies& fixed = {},
                              std::size_t cap = kDefaultEnumerationCap);

// ----------------------------------------------------------------- profiles

// Number of information states, i.e. inference runs of the tabular method.
std::size_t baseline_count(const InfluenceDiagram& diagram, NodeId decision);

// Query bound 2b/(b-1)^2 * b^(n+1) for n predecessors of arity at most b.
double query_bound(std::size_t predecessors, std::size_t arity);

// Largest arity among the decision's predecessors (2 when it has none).
std::size_t max_predecessor_arity(const InfluenceDiagram& diagram,
                                  NodeId decision);

struct ProfileReport {
  RefinementResult run;
  std::optional<OracleResult> oracle;
  nlohmann::ordered_json summary;
};

// Runs refinement for one decision and summarizes it against the oracle.
// The oracle is skipped (null in the summary) when it cannot be computed or
// `cap` is zero.
ProfileReport run_profile(const InfluenceDiagram& diagram, NodeId decision,
                          const RefinementConfig& config,
                          std::size_t cap = kDefaultEnumerationCap);

struct SweepReport {
  SweepResult sweep;
  std::optional<MultistageOracleResult> oracle;
  nlohmann::ordered_json summary;
};

SweepReport run_sweep_profile(const InfluenceDiagram& diagram,
                              const StageConfig& config,
                              std::size_t cap = kDefaultEnumerationCap);

}  // namespace idrefine
