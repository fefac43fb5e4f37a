#pragma once

// The anytime refinement loop: start from a single leaf, then repeatedly pick
// a leaf and replace it with a test on one more observable. Leaf choice and
// extension choice are independent strategies.

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "idrefine/inference.hpp"
#include "idrefine/policy_tree.hpp"
#include "idrefine/rng.hpp"

namespace idrefine {

enum class LeafStrategy { kPostHoc, kRandom };
enum class ExtensionStrategy { kGreedy, kRandom };

std::string_view to_string(LeafStrategy s);
std::string_view to_string(ExtensionStrategy s);

struct StoppingRule {
  std::optional<std::uint64_t> max_extensions;
  std::optional<std::uint64_t> max_fine_queries;
  std::optional<std::uint64_t> max_passes;
  std::optional<double> min_evi;  // greedy extension only
  bool run_to_complete = false;

  static StoppingRule complete() {
    StoppingRule r;
    r.run_to_complete = true;
    return r;
  }
  // Throws ArgumentError when no bound is set and run_to_complete is off.
  void check() const;
};

struct RefinementConfig {
  LeafStrategy leaf = LeafStrategy::kPostHoc;
  ExtensionStrategy extension = ExtensionStrategy::kGreedy;
  StoppingRule stop = StoppingRule::complete();
  std::uint64_t seed = 0;
};

struct TraceRecord {
  std::size_t iteration = 0;
  std::uint64_t fine_queries = 0;
  std::uint64_t passes = 0;
  std::size_t internal_vertices = 0;
  std::size_t leaves = 0;
  double value_normalized = 0.0;
  double value_raw = 0.0;
};

struct AnytimeTrace {
  static constexpr std::string_view kCsvHeader =
      "iteration,fine_queries,passes,internal_vertices,leaves,"
      "value_normalized,value_raw";

  std::vector<TraceRecord> records;

  std::string to_csv() const;
};

// Cost of one leaf exploration (leaf selection through extension).
struct LeafExploration {
  VertexId leaf = kNoVertex;
  std::size_t context_size = 0;
  std::size_t candidates = 0;
  std::uint64_t passes = 0;
  std::uint64_t fine_queries = 0;
  bool pruned_children = false;
};

enum class StopReason {
  kComplete,
  kMaxExtensions,
  kMaxFineQueries,
  kMaxPasses,
  kMinEvi,
  kDegenerate,
};

std::string_view to_string(StopReason r);

struct RefinementResult {
  DecisionTree tree;
  AnytimeTrace trace;
  QueryCounter counter;
  std::vector<LeafExploration> explorations;
  StopReason reason = StopReason::kComplete;
};

// Serves leaves under the internal vertex whose creation brought the largest
// gain, all of that vertex's extensible leaves before the next vertex. The
// root leaf comes first. Equal gains are ordered by a random key drawn when
// the vertex is enqueued.
class PostHocSelector {
 public:
  explicit PostHocSelector(Rng& rng) : rng_(&rng) {}

  std::optional<VertexId> next(const DecisionTree& tree);
  void on_split(VertexId vertex, double gain);

 private:
  struct Entry {
    double gain;
    std::uint64_t key;
    VertexId vertex;
    bool operator<(const Entry& o) const {
      if (gain != o.gain) return gain < o.gain;
      if (key != o.key) return key > o.key;
      return vertex > o.vertex;
    }
  };

  Rng* rng_;
  std::priority_queue<Entry> queue_;
  bool root_served_ = false;
  std::optional<VertexId> serving_;
  std::size_t position_ = 0;
};

// Uniform over the extensible leaves.
class RandomLeafSelector {
 public:
  explicit RandomLeafSelector(Rng& rng) : rng_(&rng) {}
  std::optional<VertexId> next(const DecisionTree& tree);

 private:
  Rng* rng_;
};

// Picks the extension variable for `leaf`. Greedy returns the evaluated
// best extension; random draws from the possible extensions and evaluates
// only that one.
ExtensionEvaluation select_extension(ExtensionStrategy strategy,
                                     const DecisionTree& tree, VertexId leaf,
                                     InferenceSession& session, Rng& rng);

// Runs refinement for `decision` until the stopping rule fires or the tree is
// complete. The decision must not already be fixed in `network`.
RefinementResult refine_policy(const ChanceNetwork& network, NodeId decision,
                     const RefinementConfig& config);

}  // namespace idrefine
