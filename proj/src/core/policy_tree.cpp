#include "idrefine/policy_tree.hpp"

#include <algorithm>
#include <memory>

#include "idrefine/error.hpp"

namespace idrefine {

DecisionTree::DecisionTree(const InfluenceDiagram& diagram, NodeId decision,
                           ActionValue root)
    : decision_(decision), predecessors_(diagram.node(decision).parents) {
  Vertex v;
  v.action = root.action;
  v.value = root.value;
  v.reach = 1.0;
  vertices_.push_back(v);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(vertices_.begin(), vertices_.end(),
                    [](const Vertex& v) { return v.is_leaf(); }));
}

std::vector<VertexId> DecisionTree::leaves() const {
  std::vector<VertexId> out;
  std::vector<VertexId> stack{root()};
  while (!stack.empty()) {
    VertexId id = stack.back();
    stack.pop_back();
    const Vertex& v = vertices_[id];
    if (v.is_leaf()) {
      out.push_back(id);
    } else {
      stack.insert(stack.end(), v.children.rbegin(), v.children.rend());
    }
  }
  return out;
}

Evidence DecisionTree::context(VertexId id) const {
  Evidence out;
  while (vertices_.at(id).parent != kNoVertex) {
    const Vertex& v = vertices_[id];
    out.set(*vertices_[v.parent].variable, v.branch);
    id = v.parent;
  }
  return out;
}

std::size_t DecisionTree::depth(VertexId id) const {
  std::size_t d = 0;
  while (vertices_.at(id).parent != kNoVertex) {
    id = vertices_[id].parent;
    ++d;
  }
  return d;
}

std::vector<NodeId> DecisionTree::possible_extensions(VertexId id) const {
  const Evidence ctx = context(id);
  std::vector<NodeId> out;
  for (NodeId p : predecessors_) {
    if (!ctx.contains(p)) out.push_back(p);
  }
  return out;
}

bool DecisionTree::extensible(VertexId id) const {
  const Vertex& v = vertices_.at(id);
  return v.is_leaf() && !v.pruned && depth(id) < predecessors_.size();
}

bool DecisionTree::complete() const {
  for (VertexId id = 0; id < vertices_.size(); ++id) {
    if (extensible(id)) return false;
  }
  return true;
}

std::vector<NodeId> DecisionTree::used_predecessors() const {
  std::vector<NodeId> out;
  for (NodeId p : predecessors_) {
    bool used = std::any_of(vertices_.begin(), vertices_.end(),
                            [&](const Vertex& v) { return v.variable == p; });
    if (used) out.push_back(p);
  }
  return out;
}

VertexId DecisionTree::split(VertexId id, NodeId variable,
                             std::vector<Vertex> children, double gain) {
  if (!extensible(id)) {
    throw ArgumentError("cannot extend a pruned or complete leaf");
  }
  for (std::size_t k = 0; k < children.size(); ++k) {
    children[k].parent = id;
    children[k].branch = k;
    children[k].variable.reset();
    children[k].children.clear();
    vertices_[id].children.push_back(vertices_.size());
    vertices_.push_back(children[k]);
  }
  vertices_[id].variable = variable;
  vertices_[id].gain = gain;
  return id;
}

// ------------------------------------------------------------- operations

DecisionTree init_tree(InferenceSession& session, NodeId decision) {
  ActionValue root = session.best_action(decision, Evidence{});
  return DecisionTree(session.network().diagram(), decision, root);
}

double tree_value(const DecisionTree& tree) {
  double sum = 0.0;
  for (VertexId id : tree.leaves()) {
    const Vertex& v = tree.vertex(id);
    if (!v.pruned) sum += v.value * v.reach;
  }
  return sum;
}

namespace {

void require_candidate(const DecisionTree& tree, VertexId leaf,
                       NodeId variable) {
  if (leaf >= tree.vertex_count() || !tree.extensible(leaf)) {
    throw ArgumentError("cannot extend a pruned or complete leaf");
  }
  auto xs = tree.possible_extensions(leaf);
  if (std::find(xs.begin(), xs.end(), variable) == xs.end()) {
    throw ArgumentError("variable is not a possible extension of the leaf");
  }
}

}  // namespace

ExtensionEvaluation evaluate_extension(const DecisionTree& tree, VertexId leaf,
                                       NodeId variable,
                                       std::span<const double> posterior,
                                       InferenceSession& session) {
  require_candidate(tree, leaf, variable);
  const Vertex& parent = tree.vertex(leaf);
  const Evidence ctx = tree.context(leaf);

  ExtensionEvaluation eval;
  eval.leaf = leaf;
  eval.variable = variable;
  eval.children.resize(posterior.size());
  // Children whose context is impossible are pruned without querying.
  auto skip = std::make_unique<bool[]>(posterior.size());
  for (std::size_t k = 0; k < posterior.size(); ++k) {
    eval.children[k].reach = parent.reach * posterior[k];
    skip[k] = eval.children[k].reach < kImpossibleThreshold;
  }
  auto actions = session.split_actions(
      tree.decision(), variable, ctx,
      std::span<const bool>(skip.get(), posterior.size()));

  double after = 0.0;
  for (std::size_t k = 0; k < posterior.size(); ++k) {
    ChildEvaluation& child = eval.children[k];
    if (actions[k]) {
      child.action = actions[k]->action;
      child.value = actions[k]->value;
      after += child.value * child.reach;
    } else {
      child.pruned = true;
      child.action = parent.action;
      child.value = parent.value;
    }
  }
  eval.evi = after - parent.value * parent.reach;
  return eval;
}

double evi(const DecisionTree& tree, VertexId leaf, NodeId variable,
           InferenceSession& session) {
  require_candidate(tree, leaf, variable);
  auto post = session.posterior(variable, tree.context(leaf));
  return evaluate_extension(tree, leaf, variable, post, session).evi;
}

const ExtensionEvaluation& BestExtension::chosen() const {
  for (const auto& c : candidates) {
    if (c.variable == variable) return c;
  }
  throw ArgumentError("best extension has no candidates");
}

BestExtension best_extension(const DecisionTree& tree, VertexId leaf,
                             InferenceSession& session) {
  if (leaf >= tree.vertex_count() || !tree.extensible(leaf)) {
    throw ArgumentError("cannot extend a pruned or complete leaf");
  }
  const auto xs = tree.possible_extensions(leaf);
  const auto posts = session.posteriors(xs, tree.context(leaf));
  BestExtension best;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    best.candidates.push_back(
        evaluate_extension(tree, leaf, xs[i], posts[i], session));
    const double e = best.candidates.back().evi;
    if (i == 0 || e > best.evi + kTieTolerance) {
      best.variable = xs[i];
      best.evi = e;
    }
  }
  return best;
}

VertexId extend(DecisionTree& tree, const ExtensionEvaluation& evaluation) {
  require_candidate(tree, evaluation.leaf, evaluation.variable);
  std::vector<Vertex> children;
  for (const ChildEvaluation& c : evaluation.children) {
    Vertex v;
    v.action = c.action;
    v.value = c.value;
    v.reach = c.reach;
    v.pruned = c.pruned;
    children.push_back(v);
  }
  return tree.split(evaluation.leaf, evaluation.variable, std::move(children),
                    evaluation.evi);
}

VertexId extend(DecisionTree& tree, VertexId leaf, NodeId variable,
                InferenceSession& session) {
  require_candidate(tree, leaf, variable);
  auto post = session.posterior(variable, tree.context(leaf));
  return extend(tree, evaluate_extension(tree, leaf, variable, post, session));
}

VertexId policy_leaf(const DecisionTree& tree, const Evidence& state) {
  for (NodeId p : tree.predecessors()) {
    if (!state.contains(p)) {
      throw ArgumentError("information state is incomplete");
    }
  }
  VertexId id = tree.root();
  while (!tree.vertex(id).is_leaf()) {
    const Vertex& v = tree.vertex(id);
    id = v.children.at(*state.get(*v.variable));
  }
  return id;
}

std::size_t apply_policy(const DecisionTree& tree, const Evidence& state) {
  return tree.vertex(policy_leaf(tree, state)).action;
}

std::vector<PolicyRow> to_table(const DecisionTree& tree,
                                const InfluenceDiagram& diagram) {
  InformationStates states = information_states(diagram, tree.decision());
  std::vector<PolicyRow> rows;
  rows.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    PolicyRow row;
    row.state = states.at(i);
    row.leaf = policy_leaf(tree, row.state);
    row.action = tree.vertex(row.leaf).action;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::ordered_json vertex_json(const DecisionTree& tree,
                                   const InfluenceDiagram& diagram,
                                   VertexId id) {
  const Vertex& v = tree.vertex(id);
  nlohmann::ordered_json out;
  if (v.is_leaf()) {
    out["action"] = diagram.node(tree.decision()).outcomes.at(v.action);
    out["value"] = v.value;
    out["prob"] = v.reach;
    out["pruned"] = v.pruned;
    return out;
  }
  const Node& var = diagram.node(*v.variable);
  out["var"] = var.name;
  nlohmann::ordered_json kids = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < v.children.size(); ++k) {
    kids[var.outcomes.at(k)] = vertex_json(tree, diagram, v.children[k]);
  }
  out["children"] = std::move(kids);
  return out;
}

}  // namespace

nlohmann::ordered_json tree_to_json(const DecisionTree& tree,
                                    const InfluenceDiagram& diagram) {
  return vertex_json(tree, diagram, tree.root());
}

}  // namespace idrefine
