#include "idrefine/refine.hpp"

#include <cstdio>

#include "idrefine/error.hpp"

namespace idrefine {

std::string_view to_string(LeafStrategy s) {
  return s == LeafStrategy::kPostHoc ? "posthoc" : "random";
}

std::string_view to_string(ExtensionStrategy s) {
  return s == ExtensionStrategy::kGreedy ? "greedy" : "random";
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kComplete:
      return "complete";
    case StopReason::kMaxExtensions:
      return "max-extensions";
    case StopReason::kMaxFineQueries:
      return "max-fine-queries";
    case StopReason::kMaxPasses:
      return "max-passes";
    case StopReason::kMinEvi:
      return "min-evi";
    case StopReason::kDegenerate:
      return "degenerate-utility";
  }
  return "?";
}

void StoppingRule::check() const {
  if (!run_to_complete && !max_extensions && !max_fine_queries &&
      !max_passes && !min_evi) {
    throw ArgumentError("stopping rule sets no bound");
  }
}

std::string AnytimeTrace::to_csv() const {
  std::string out(kCsvHeader);
  out += '\n';
  char line[256];
  for (const TraceRecord& r : records) {
    std::snprintf(line, sizeof line, "%zu,%llu,%llu,%zu,%zu,%.17g,%.17g\n",
                  r.iteration, static_cast<unsigned long long>(r.fine_queries),
                  static_cast<unsigned long long>(r.passes),
                  r.internal_vertices, r.leaves, r.value_normalized,
                  r.value_raw);
    out += line;
  }
  return out;
}

// ----------------------------------------------------------- leaf choice

std::optional<VertexId> PostHocSelector::next(const DecisionTree& tree) {
  if (!root_served_) {
    root_served_ = true;
    if (tree.extensible(tree.root())) return tree.root();
  }
  while (true) {
    if (serving_) {
      const auto& kids = tree.vertex(*serving_).children;
      while (position_ < kids.size()) {
        VertexId child = kids[position_++];
        if (tree.extensible(child)) return child;
      }
      serving_.reset();
    }
    if (queue_.empty()) return std::nullopt;
    serving_ = queue_.top().vertex;
    position_ = 0;
    queue_.pop();
  }
}

void PostHocSelector::on_split(VertexId vertex, double gain) {
  queue_.push(Entry{gain, rng_->next(), vertex});
}

std::optional<VertexId> RandomLeafSelector::next(const DecisionTree& tree) {
  std::vector<VertexId> open;
  for (VertexId id : tree.leaves()) {
    if (tree.extensible(id)) open.push_back(id);
  }
  if (open.empty()) return std::nullopt;
  return open[rng_->below(open.size())];
}

// ------------------------------------------------------ extension choice

ExtensionEvaluation select_extension(ExtensionStrategy strategy,
                                     const DecisionTree& tree, VertexId leaf,
                                     InferenceSession& session, Rng& rng) {
  if (strategy == ExtensionStrategy::kGreedy) {
    BestExtension best = best_extension(tree, leaf, session);
    return best.chosen();
  }
  const auto xs = tree.possible_extensions(leaf);
  if (xs.empty() || !tree.extensible(leaf)) {
    throw ArgumentError("cannot extend a pruned or complete leaf");
  }
  const NodeId x = xs[rng.below(xs.size())];
  auto post = session.posterior(x, tree.context(leaf));
  return evaluate_extension(tree, leaf, x, post, session);
}

// --------------------------------------------------------- refinement loop

namespace {

TraceRecord snapshot(std::size_t iteration, const DecisionTree& tree,
                     const InferenceSession& session) {
  TraceRecord r;
  r.iteration = iteration;
  r.fine_queries = session.counter().fine;
  r.passes = session.counter().passes;
  r.internal_vertices = tree.internal_count();
  r.leaves = tree.leaf_count();
  r.value_normalized = tree_value(tree);
  r.value_raw = session.network().denormalize(r.value_normalized);
  return r;
}

}  // namespace

RefinementResult refine_policy(const ChanceNetwork& network, NodeId decision,
                     const RefinementConfig& config) {
  config.stop.check();
  InferenceSession session(network);
  Rng rng(config.seed);
  PostHocSelector posthoc(rng);
  RandomLeafSelector random_leaf(rng);

  RefinementResult result{init_tree(session, decision), {}, {}, {}, {}};
  DecisionTree& tree = result.tree;
  result.trace.records.push_back(snapshot(0, tree, session));

  const StoppingRule& stop = config.stop;
  std::size_t extensions = 0;
  StopReason reason = StopReason::kComplete;
  if (network.degenerate()) reason = StopReason::kDegenerate;

  while (reason != StopReason::kDegenerate) {
    const QueryCounter& c = session.counter();
    if (stop.max_extensions && extensions >= *stop.max_extensions) {
      reason = StopReason::kMaxExtensions;
      break;
    }
    if (stop.max_fine_queries && c.fine >= *stop.max_fine_queries) {
      reason = StopReason::kMaxFineQueries;
      break;
    }
    if (stop.max_passes && c.passes >= *stop.max_passes) {
      reason = StopReason::kMaxPasses;
      break;
    }
    std::optional<VertexId> leaf = config.leaf == LeafStrategy::kPostHoc
                                       ? posthoc.next(tree)
                                       : random_leaf.next(tree);
    if (!leaf) {
      reason = StopReason::kComplete;
      break;
    }

    const QueryCounter before = session.counter();
    LeafExploration ex;
    ex.leaf = *leaf;
    ex.context_size = tree.depth(*leaf);
    ex.candidates = config.extension == ExtensionStrategy::kGreedy
                        ? tree.possible_extensions(*leaf).size()
                        : 1;
    ExtensionEvaluation chosen =
        select_extension(config.extension, tree, *leaf, session, rng);
    ex.passes = session.counter().passes - before.passes;
    ex.fine_queries = session.counter().fine - before.fine;
    for (const auto& child : chosen.children) {
      ex.pruned_children = ex.pruned_children || child.pruned;
    }
    result.explorations.push_back(ex);

    if (config.extension == ExtensionStrategy::kGreedy && stop.min_evi &&
        chosen.evi < *stop.min_evi) {
      reason = StopReason::kMinEvi;
      break;
    }

    VertexId vertex = extend(tree, chosen);
    ++extensions;
    if (config.leaf == LeafStrategy::kPostHoc) {
      posthoc.on_split(vertex, chosen.evi);
    }
    result.trace.records.push_back(snapshot(extensions, tree, session));
  }

  result.counter = session.counter();
  result.reason = reason;
  return result;
}

}  // namespace idrefine
