#include "support/brute_force.hpp"

#include <algorithm>

namespace testing_support {

using namespace idrefine;

BruteForce::BruteForce(const InfluenceDiagram& diagram, FixedPolicies fixed)
    : diagram_(diagram), fixed_(std::move(fixed)) {
  value_node_ = diagram.value_node();
  const auto& u = diagram.node(value_node_).table;
  u_min_ = *std::min_element(u.begin(), u.end());
  u_max_ = *std::max_element(u.begin(), u.end());
}

double BruteForce::probability(const Evidence& evidence) const {
  const std::size_t n = diagram_.size();
  std::vector<std::size_t> radix(n);
  for (NodeId id = 0; id < n; ++id) {
    radix[id] = id == value_node_ ? 2 : diagram_.arity(id);
  }
  MixedRadix all(radix);
  auto row_of = [&](const std::vector<NodeId>& parents,
                    const std::vector<std::size_t>& x) {
    std::size_t r = 0;
    for (NodeId p : parents) r = r * diagram_.arity(p) + x[p];
    return r;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto x = all.digits(i);
    bool consistent = true;
    for (const Finding& f : evidence.findings()) {
      if (x[f.variable] != f.outcome) consistent = false;
    }
    if (!consistent) continue;
    double w = 1.0;
    for (NodeId id = 0; id < n; ++id) {
      const Node& node = diagram_.node(id);
      if (node.kind == NodeKind::kChance) {
        w *= node.table[row_of(node.parents, x) * node.outcomes.size() + x[id]];
      } else if (node.kind == NodeKind::kDecision) {
        auto it = fixed_.find(id);
        if (it == fixed_.end()) {
          w /= static_cast<double>(node.outcomes.size());
        } else {
          w *= it->second.table[row_of(it->second.parents, x) *
                                    node.outcomes.size() +
                                x[id]];
        }
      } else {
        const double u = node.table[row_of(node.parents, x)];
        const double p = u_max_ > u_min_ ? (u - u_min_) / (u_max_ - u_min_)
                                         : 0.5;
        w *= x[id] == 0 ? p : 1.0 - p;
      }
    }
    total += w;
  }
  return total;
}

std::vector<double> BruteForce::posterior(NodeId variable,
                                          const Evidence& evidence) const {
  const std::size_t k = variable == value_node_ ? 2 : diagram_.arity(variable);
  std::vector<double> out(k);
  double z = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = probability(evidence.with(variable, j));
    z += out[j];
  }
  for (double& p : out) p /= z;
  return out;
}

double BruteForce::value(const Evidence& evidence) const {
  return posterior(value_node_, evidence)[0];
}

}  // namespace testing_support
