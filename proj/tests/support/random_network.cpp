#include "support/random_network.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace idrefine;

namespace testing_support {

InfluenceDiagram random_network(Rng& rng, std::size_t chance) {
  DiagramBuilder b;
  std::vector<std::string> names;
  auto pick_parents = [&](std::size_t limit, std::size_t max_count) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < limit && out.size() < max_count; ++i) {
      if (rng.uniform() < 0.4) out.push_back(names[i]);
    }
    return out;
  };
  const std::size_t decision_at = rng.below(chance + 1);
  for (std::size_t i = 0; i <= chance; ++i) {
    if (i == decision_at) {
      auto info = pick_parents(names.size(), 3);
      b.decision("d", {"a0", "a1"}, info);
      names.push_back("d");
      continue;
    }
    auto parents = pick_parents(names.size(), 3);
    std::vector<double> table;
    for (std::size_t r = 0; r < (std::size_t{1} << parents.size()); ++r) {
      // Occasional hard zeros exercise impossible contexts.
      double p = rng.uniform() < 0.1 ? 1.0 : rng.uniform_open();
      table.push_back(p);
      table.push_back(1.0 - p);
    }
    names.push_back("x" + std::to_string(i));
    b.chance(names.back(), {"t", "f"}, parents, table);
  }
  auto vparents = pick_parents(names.size(), 4);
  if (std::find(vparents.begin(), vparents.end(), "d") == vparents.end()) {
    vparents.push_back("d");
  }
  std::vector<double> u;
  for (std::size_t r = 0; r < (std::size_t{1} << vparents.size()); ++r) {
    u.push_back(std::floor(rng.uniform() * 100.0));
  }
  b.value("v", vparents, u);
  return b.build();
}

Evidence random_evidence(Rng& rng, const InfluenceDiagram& g,
                         NodeId exclude_a, NodeId exclude_b) {
  Evidence e;
  for (NodeId id = 0; id < g.size(); ++id) {
    if (id == exclude_a || id == exclude_b) continue;
    if (g.node(id).kind != NodeKind::kChance) continue;
    if (rng.uniform() < 0.3) e.set(id, rng.below(g.arity(id)));
  }
  return e;
}


}  // namespace testing_support
