#include <doctest.h>

#include "idrefine/error.hpp"
#include "idrefine/harness.hpp"
#include "idrefine/policy_tree.hpp"

using namespace idrefine;

TEST_CASE("mini-weather: one leaf, then a split on R") {
  InfluenceDiagram g = mini_weather();
  ChanceNetwork net = compile_network(g);
  InferenceSession s(net);
  const NodeId R = g.require("R"), D = g.require("D");

  DecisionTree t = init_tree(s, D);
  CHECK(s.counter().passes == 2);
  CHECK(t.vertex_count() == 1);
  CHECK(t.leaf_count() == 1);
  CHECK(t.internal_count() == 0);
  CHECK(t.vertex(t.root()).action == 1);
  CHECK(t.vertex(t.root()).reach == 1.0);
  CHECK(tree_value(t) == doctest::Approx(0.70).epsilon(1e-12));
  CHECK(t.possible_extensions(t.root()) == std::vector<NodeId>{R});
  CHECK(t.extensible(t.root()));
  CHECK(!t.complete());

  // 0.69 * 2100/2300 + 0.31 * 1820/3100 - 0.70 = 0.63 + 0.182 - 0.70.
  const double gain = evi(t, t.root(), R, s);
  CHECK(gain == doctest::Approx(0.112).epsilon(1e-12));
  CHECK(t.vertex_count() == 1);

  extend(t, t.root(), R, s);
  CHECK(t.internal_count() == 1);
  CHECK(t.leaf_count() == 2);
  CHECK(t.vertex(t.root()).gain == doctest::Approx(0.112).epsilon(1e-12));
  CHECK(tree_value(t) == doctest::Approx(0.812).epsilon(1e-12));
  CHECK(t.complete());
  CHECK(t.used_predecessors() == std::vector<NodeId>{R});

  const auto leaves = t.leaves();
  REQUIRE(leaves.size() == 2);
  CHECK(t.vertex(leaves[0]).action == 1);  // sunny -> leave
  CHECK(t.vertex(leaves[1]).action == 0);  // rainy -> take
  CHECK(t.context(leaves[1]) == Evidence{{R, 1}});
  CHECK(t.depth(leaves[1]) == 1);
  CHECK(!t.extensible(leaves[0]));

  CHECK(apply_policy(t, {{R, 0}}) == 1);
  CHECK(apply_policy(t, {{R, 1}}) == 0);
  CHECK_THROWS_AS(apply_policy(t, {}), ArgumentError);

  auto table = to_table(t, g);
  REQUIRE(table.size() == 2);
  CHECK(table[0].action == 1);
  CHECK(table[1].action == 0);

  auto j = tree_to_json(t, g);
  CHECK(j["var"] == "R");
  CHECK(j["children"]["sunny"]["action"] == "leave");
  CHECK(j["children"]["rainy"]["action"] == "take");
  CHECK(j["children"]["rainy"]["pruned"] == false);
}

TEST_CASE("greedy prefers R over an irrelevant coin") {
  InfluenceDiagram g = mini_weather_coin();
  ChanceNetwork net = compile_network(g);
  InferenceSession s(net);
  DecisionTree t = init_tree(s, g.require("D"));
  s.reset_counter();
  BestExtension best = best_extension(t, t.root(), s);
  CHECK(best.variable == g.require("R"));
  CHECK(best.evi == doctest::Approx(0.112).epsilon(1e-12));
  REQUIRE(best.candidates.size() == 2);
  CHECK(std::abs(best.candidates[1].evi) < 1e-12);
  // One batched posterior pass plus two passes per candidate.
  CHECK(s.counter().passes == 5);
  CHECK(s.counter().fine == 4 + 8);
  CHECK(best.chosen().variable == best.variable);

  // Applying the cached evaluation costs nothing.
  s.reset_counter();
  extend(t, best.chosen());
  CHECK(s.counter() == QueryCounter{});
}

TEST_CASE("impossible children are pruned") {
  InfluenceDiagram g = exclusion_fixture();
  ChanceNetwork net = compile_network(g);
  InferenceSession s(net);
  const NodeId A = g.require("A"), B = g.require("B"), C = g.require("C");
  DecisionTree t = init_tree(s, g.require("D"));
  extend(t, t.root(), A, s);
  const VertexId a0 = t.vertex(t.root()).children[0];
  extend(t, a0, B, s);
  const Vertex& split = t.vertex(a0);
  const Vertex& b0 = t.vertex(split.children[0]);
  const Vertex& b1 = t.vertex(split.children[1]);
  CHECK(!b0.pruned);
  CHECK(b1.pruned);
  CHECK(b1.reach == 0.0);
  CHECK(b1.action == split.action);
  CHECK(!t.extensible(split.children[1]));
  CHECK(t.extensible(split.children[0]));
  // B restates A, so the split gains nothing.
  CHECK(std::abs(split.gain) < 1e-12);

  CHECK_THROWS_AS(extend(t, split.children[1], C, s), ArgumentError);
  CHECK_THROWS_AS(best_extension(t, split.children[1], s), ArgumentError);
}

TEST_CASE("extension preconditions") {
  InfluenceDiagram g = weather3();
  ChanceNetwork net = compile_network(g);
  InferenceSession s(net);
  const NodeId Rep = g.require("Report"), View = g.require("View");
  DecisionTree t = init_tree(s, g.require("Umbrella"));
  CHECK(t.possible_extensions(t.root()) == std::vector<NodeId>{Rep, View});
  CHECK_THROWS_AS(evi(t, t.root(), g.require("Weather"), s), ArgumentError);
  extend(t, t.root(), View, s);
  CHECK_THROWS_AS(extend(t, t.root(), Rep, s), ArgumentError);
  const VertexId child = t.vertex(t.root()).children[1];
  CHECK(t.possible_extensions(child) == std::vector<NodeId>{Rep});
  CHECK_THROWS_AS(evi(t, child, View, s), ArgumentError);
  CHECK(t.used_predecessors() == std::vector<NodeId>{View});
}

TEST_CASE("tree value never decreases under extension") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    InfluenceDiagram g = gen_random_id({4, seed});
    ChanceNetwork net = compile_network(g);
    InferenceSession s(net);
    DecisionTree t = init_tree(s, g.require("d"));
    double value = tree_value(t);
    while (!t.complete()) {
      VertexId leaf = kNoVertex;
      for (VertexId id : t.leaves()) {
        if (t.extensible(id)) {
          leaf = id;
          break;
        }
      }
      const NodeId x = t.possible_extensions(leaf).back();
      const double gain = evi(t, leaf, x, s);
      CHECK(gain >= -1e-12);
      extend(t, leaf, x, s);
      const double next = tree_value(t);
      CHECK(next == doctest::Approx(value + gain).epsilon(1e-12));
      CHECK(next >= value - 1e-12);
      value = next;
    }
    // Every complete information state reaches a leaf.
    CHECK(to_table(t, g).size() == 16);
  }
}
