// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "idrefine/harness.hpp"
#include "idrefine/multistage.hpp"
#include "idrefine/refine.hpp"
#include "idrefine/rng.hpp"
#include "support/brute_force.hpp"
#include "support/random_network.hpp"

using namespace idrefine;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kPass;
  std::string detail;
};

// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 3) messages_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }

  Verdict verdict() const {
    std::string detail = std::to_string(count_) + " checks";
    for (const auto& n : notes_) detail += "; " + n;
    if (failures_ == 0) return {Outcome::kPass, detail};
    detail += "; " + std::to_string(failures_) + " failed";
    for (const auto& m : messages_) detail += "; " + m;
    return {Outcome::kFail, detail};
  }

 private:
  std::size_t count_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
  std::vector<std::string> notes_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

RefinementConfig strategy(LeafStrategy leaf, ExtensionStrategy ext,
                          std::uint64_t seed) {
  RefinementConfig c;
  c.leaf = leaf;
  c.extension = ext;
  c.seed = seed;
  return c;
}

RefinementResult solve(const InfluenceDiagram& g, NodeId d,
                       const RefinementConfig& c) {
  return refine_policy(compile_network(g), d, c);
}

bool monotone(const AnytimeTrace& t) {
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    if (t.records[i].value_normalized <
        t.records[i - 1].value_normalized - 1e-9) {
      return false;
    }
  }
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs shared by criteria 1 to 3.
struct GreedyRun {
  std::size_t n;
  std::uint64_t seed;
  double value;
  double oracle;
  AnytimeTrace trace;
  QueryCounter counter;
};

const std::vector<GreedyRun>& greedy_runs() {
  static const std::vector<GreedyRun> runs = [] {
    std::vector<GreedyRun> out;
    for (std::size_t n = 2; n <= 6; ++n) {
      for (std::uint64_t k = 0; k < 10; ++k) {
        const std::uint64_t seed = 1000 * n + k;
        InfluenceDiagram g = gen_random_id({n, seed});
        const NodeId d = g.require("d");
        RefinementResult r = solve(g, d, RefinementConfig{});
        out.push_back({n, seed, tree_value(r.tree), oracle_optimal(g, d).value,
                       std::move(r.trace), r.counter});
      }
    }
    return out;
  }();
  return runs;
}

Verdict oracle_equivalence() {
  Check c;
  for (const GreedyRun& r : greedy_runs()) {
    c.expect(std::abs(r.value - r.oracle) <= 1e-9,
             fmt("n=%g seed=%g gap=%g", double(r.n), double(r.seed),
                 r.value - r.oracle));
    c.expect(std::abs(r.trace.records.back().value_normalized - r.oracle) <= 1e-9,
             "trace does not end at the oracle value");
  }
  c.note(std::to_string(greedy_runs().size()) + " diagrams, n in 2..6");
  return c.verdict();
}

Verdict monotone_profile() {
  Check c;
  for (const GreedyRun& r : greedy_runs()) {
    c.expect(monotone(r.trace), fmt("greedy n=%g seed=%g", double(r.n), double(r.seed)));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 2 + seed % 5;
    InfluenceDiagram g = gen_random_id({n, 5000 + seed});
    const auto leaf = seed % 2 ? LeafStrategy::kPostHoc : LeafStrategy::kRandom;
    RefinementResult r =
        solve(g, g.require("d"), strategy(leaf, ExtensionStrategy::kRandom, seed));
    c.expect(monotone(r.trace), fmt("random seed=%g", double(seed)));
  }
  return c.verdict();
}

Verdict query_bound_check() {
  Check c;
  double worst = 0.0;
  for (const GreedyRun& r : greedy_runs()) {
    const double gate = 8.0 * std::pow(2.0, double(r.n + 1));
    const double bound = query_bound(r.n, 2);
    c.expect(double(r.counter.fine) < gate,
             fmt("n=%g fine=%g gate=%g", double(r.n), double(r.counter.fine), gate));
    c.expect(double(r.counter.action_queries) < bound,
             fmt("n=%g action queries=%g bound=%g", double(r.n),
                 double(r.counter.action_queries), bound));
    worst = std::max(worst, double(r.counter.action_queries) / bound);
  }
  for (std::size_t n = 2; n <= 3; ++n) {
    for (std::uint64_t k = 0; k < 5; ++k) {
      InfluenceDiagram g = gen_random_id({n, 7000 + 10 * n + k, 3});
      const NodeId d = g.require("d");
      RefinementResult r = solve(g, d, RefinementConfig{});
      const double gate = 13.5 * std::pow(3.0, double(n + 1));
      const double bound = query_bound(n, 3);
      c.expect(r.tree.complete(), "b=3 tree incomplete");
      c.expect(double(r.counter.fine) < gate,
               fmt("b=3 n=%g fine=%g gate=%g", double(n), double(r.counter.fine), gate));
      c.expect(double(r.counter.action_queries) < bound,
               fmt("b=3 n=%g action queries=%g bound=%g", double(n),
                   double(r.counter.action_queries), bound));
      worst = std::max(worst, double(r.counter.action_queries) / bound);
    }
  }
  c.note(fmt("max action-query/bound ratio %.3f", worst));
  return c.verdict();
}

Verdict pass_formula() {
  Check c;
  std::size_t explorations = 0;
  auto check_run = [&](const InfluenceDiagram& g, NodeId d) {
    const std::size_t n = g.node(d).parents.size();
    RefinementResult r = solve(g, d, RefinementConfig{});
    for (const LeafExploration& ex : r.explorations) {
      ++explorations;
      c.expect(!ex.pruned_children, "fixture is not pruning-free");
      c.expect(ex.passes == 2 * (n - ex.context_size) + 1,
               fmt("k=%g passes=%g expected=%g", double(ex.context_size),
                   double(ex.passes), double(2 * (n - ex.context_size) + 1)));
    }
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    InfluenceDiagram g = gen_random_id({6, 300 + seed});
    check_run(g, g.require("d"));
  }
  InfluenceDiagram w3 = weather3();
  check_run(w3, w3.require("Umbrella"));
  c.note(std::to_string(explorations) + " leaf explorations");
  return c.verdict();
}

Verdict first_tree_cost() {
  Check c;
  std::vector<InfluenceDiagram> diagrams;
  for (auto name : fixture_names()) diagrams.push_back(fixture(name));
  for (std::size_t n = 1; n <= 8; ++n) {
    diagrams.push_back(gen_random_id({n, n}));
    diagrams.push_back(gen_random_id({std::min<std::size_t>(n, 4), n, 3}));
    diagrams.push_back(gen_two_stage({std::min<std::size_t>(n, 4), n}));
  }
  for (const InfluenceDiagram& g : diagrams) {
    for (NodeId d : g.decision_order()) {
      ChanceNetwork net = compile_network(g);
      InferenceSession s(net);
      init_tree(s, d);
      c.expect(s.counter().passes == 2,
               g.node(d).name + fmt(": %g passes", double(s.counter().passes)));
    }
  }
  return c.verdict();
}

struct WorkComparison {
  std::vector<double> greedy;
  std::vector<double> random;
  std::vector<AnytimeTrace> random_traces;
};

const WorkComparison& n8_runs() {
  static const WorkComparison w = [] {
    WorkComparison out;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      InfluenceDiagram g = gen_random_id({8, 8000 + seed});
      const NodeId d = g.require("d");
      out.greedy.push_back(double(solve(g, d, RefinementConfig{}).counter.passes));
      RefinementResult r = solve(
          g, d, strategy(LeafStrategy::kRandom, ExtensionStrategy::kRandom, seed));
      out.random.push_back(double(r.counter.passes));
      out.random_traces.push_back(std::move(r.trace));
    }
    return out;
  }();
  return w;
}

Verdict random_vs_greedy() {
  Check c;
  const double g = median(n8_runs().greedy), r = median(n8_runs().random);
  c.expect(r < g, fmt("median random %g >= greedy %g", r, g));
  c.note(fmt("median passes random %g, greedy %g, ratio %.3f", r, g, r / g));
  c.note(r / g < 0.5 ? "under half (soft)" : "not under half (soft)");
  return c.verdict();
}

Verdict linear_work() {
  Check c;
  for (const AnytimeTrace& t : n8_runs().random_traces) {
    const auto& rec = t.records;
    if (rec.size() < 2) continue;
    const auto step = rec[1].passes - rec[0].passes;
    for (std::size_t i = 1; i < rec.size(); ++i) {
      c.expect(rec[i].passes - rec[i - 1].passes == step,
               fmt("row %g step %g vs %g", double(i),
                   double(rec[i].passes - rec[i - 1].passes), double(step)));
      c.expect(rec[i].internal_vertices == i, "one extension per row");
    }
    c.expect(step == 3, fmt("step %g", double(step)));
  }
  c.note("3 passes per extension");
  return c.verdict();
}

Verdict multistage_optimality() {
  Check c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    InfluenceDiagram g = gen_two_stage({1 + seed % 3, 9000 + seed});
    SweepResult s = sweep_back(g, RefinementConfig{});
    MultistageOracleResult o = oracle_optimal_multistage(g);
    c.expect(std::abs(s.policy.value - o.value) <= 1e-9,
             fmt("seed=%g sweep=%.12g oracle=%.12g", double(seed), s.policy.value,
                 o.value));
  }
  return c.verdict();
}

Verdict zero_probability_pruning() {
  Check c;
  InfluenceDiagram g = exclusion_fixture();
  const NodeId d = g.require("D");
  const double optimum = oracle_optimal(g, d).value;
  for (auto ext : {ExtensionStrategy::kGreedy, ExtensionStrategy::kRandom}) {
    for (auto leaf : {LeafStrategy::kPostHoc, LeafStrategy::kRandom}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RefinementResult r = solve(g, d, strategy(leaf, ext, seed));
        std::size_t pruned = 0;
        for (VertexId id = 0; id < r.tree.vertex_count(); ++id) {
          const Vertex& v = r.tree.vertex(id);
          if (!v.pruned) continue;
          ++pruned;
          c.expect(v.is_leaf(), "pruned vertex was extended");
          c.expect(v.reach == 0.0, "pruned vertex is reachable");
        }
        for (const LeafExploration& ex : r.explorations) {
          c.expect(!r.tree.vertex(ex.leaf).pruned, "pruned leaf was explored");
        }
        c.expect(pruned > 0, "no pruned leaf");
        c.expect(r.tree.complete(), "tree incomplete");
        c.expect(std::abs(tree_value(r.tree) - optimum) <= 1e-9,
                 fmt("value %.12g vs %.12g", tree_value(r.tree), optimum));
      }
    }
  }
  return c.verdict();
}

Verdict engine_exactness() {
  using testing_support::BruteForce;
  Check c;
  Rng rng(424242);
  std::size_t queries = 0;
  while (queries < 100) {
    InfluenceDiagram g = testing_support::random_network(rng, 3 + rng.below(8));
    ChanceNetwork net = compile_network(g);
    BruteForce bf(g);
    InferenceSession s(net);
    for (int q = 0; q < 5 && queries < 100; ++q) {
      const NodeId x = rng.below(g.size());
      Evidence e = testing_support::random_evidence(rng, g, x, g.value_node());
      const double pe = bf.probability(e);
      c.expect(std::abs(s.context_probability(e) - pe) <= 1e-9, "P(evidence)");
      if (pe < 1e-9) continue;
      const auto engine = s.posterior(x, e);
      const auto reference = bf.posterior(x, e);
      for (std::size_t j = 0; j < engine.size(); ++j) {
        c.expect(std::abs(engine[j] - reference[j]) <= 1e-9,
                 fmt("posterior %.12g vs %.12g", engine[j], reference[j]));
      }
      ++queries;
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    InfluenceDiagram g = gen_random_id({1 + rng.below(8), rng.next()});
    ChanceNetwork net = compile_network(g);
    InferenceSession s(net);
    const NodeId d = g.require("d");
    const auto& preds = g.node(d).parents;
    const NodeId x = preds[rng.below(preds.size())];
    Evidence gamma;
    for (NodeId p : preds) {
      if (p != x && rng.uniform() < 0.5) gamma.set(p, rng.below(2));
    }
    const Evidence with_a = gamma.with(d, rng.below(2));
    const NodeId proxy = net.utility_proxy();
    const double whole = s.posterior(proxy, with_a)[kProxyTrue];
    const auto px = s.posterior(x, with_a);
    double parts = 0.0;
    for (std::size_t j = 0; j < px.size(); ++j) {
      parts += px[j] * s.posterior(proxy, with_a.with(x, j))[kProxyTrue];
    }
    c.expect(std::abs(whole - parts) <= 1e-9, fmt("total expectation %.3g", whole - parts));
  }
  c.note("100 queries, 100 total-expectation tuples");
  return c.verdict();
}

Verdict determinism() {
  Check c;
  const std::string single = serialize_diagram(gen_random_id({6, 11}));
  const std::string two = serialize_diagram(gen_two_stage({3, 2}));
  auto solve_text = [&](const RefinementConfig& cfg) {
    InfluenceDiagram g = parse_diagram(single);
    RefinementResult r = solve(g, g.require("d"), cfg);
    return r.trace.to_csv() + tree_to_json(r.tree, g).dump();
  };
  auto sweep_text = [&](const RefinementConfig& cfg) {
    InfluenceDiagram g = parse_diagram(two);
    SweepResult r = sweep_back(g, cfg);
    std::string out;
    for (const StageResult& st : r.stages) out += st.trace.to_csv();
    return out + policy_to_json(r.policy, g).dump();
  };
  for (auto leaf : {LeafStrategy::kPostHoc, LeafStrategy::kRandom}) {
    for (auto ext : {ExtensionStrategy::kGreedy, ExtensionStrategy::kRandom}) {
      for (std::uint64_t seed : {0u, 7u, 123u}) {
        const auto cfg = strategy(leaf, ext, seed);
        c.expect(solve_text(cfg) == solve_text(cfg), "solve output differs");
        c.expect(sweep_text(cfg) == sweep_text(cfg), "sweep output differs");
      }
    }
  }
  c.note("CLI byte comparison runs as cli.determinism");
  return c.verdict();
}

Verdict car_buyer() {
  const char* path = std::getenv("IDREFINE_CAR_BUYER_DATA");
  if (!path || !*path) {
    return {Outcome::kSkip,
            "numeric data not supplied; set IDREFINE_CAR_BUYER_DATA to a "
            "diagram file with the Car Buyer topology"};
  }
  Check c;
  std::ifstream in(path);
  if (!in) return {Outcome::kFail, std::string("cannot read ") + path};
  std::stringstream text;
  text << in.rdbuf();
  InfluenceDiagram g;
  try {
    g = load_car_buyer(text.str());
  } catch (const std::exception& e) {
    return {Outcome::kFail, e.what()};
  }
  const NodeId buy = g.require("Buy");
  c.expect(baseline_count(g, buy) == 96,
           fmt("baseline %g", double(baseline_count(g, buy))));
  const std::size_t minimal = minimal_tree_size(g, buy);
  c.expect(minimal == 7, fmt("optimal last-decision tree has %g internal vertices",
                             double(minimal)));

  // Query counts are reported against reference figures, not asserted.
  auto within = [](double got, double want) {
    return std::abs(got - want) <= 0.2 * want ? "within 20%" : "outside 20%";
  };
  SweepResult full = sweep_back(g, RefinementConfig{});
  RefinementConfig first;
  first.stop = StoppingRule{};
  first.stop.max_extensions = 0;
  SweepResult quick = sweep_back(g, first);
  const double gap = full.policy.value_raw != 0.0
                         ? 1.0 - quick.policy.value_raw / full.policy.value_raw
                         : 0.0;
  c.note(fmt("complete sweep %g passes, %g fine queries (reference 33)",
             double(full.total.passes), double(full.total.fine)) +
         ", passes " + within(double(full.total.passes), 33));
  c.note(fmt("first trees %g passes (reference 6)", double(quick.total.passes)) +
         ", " + within(double(quick.total.passes), 6));
  c.note(fmt("first-tree policy %.2f%% below the sweep (reference about 3%%)",
             100.0 * gap));
  c.note(fmt("last-decision refined tree %g internal, %g leaves (reference 13, 13)",
             double(full.policy.policies.back().tree.internal_count()),
             double(full.policy.policies.back().tree.leaf_count())));
  return c.verdict();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 oracle equivalence", oracle_equivalence},
      {"2 monotone anytime profile", monotone_profile},
      {"3 query bound", query_bound_check},
      {"4 per-leaf pass formula", pass_formula},
      {"5 first-tree cost", first_tree_cost},
      {"6 random vs greedy work", random_vs_greedy},
      {"7 linear work for random refinement", linear_work},
      {"8 multistage optimality", multistage_optimality},
      {"9 zero-probability pruning", zero_probability_pruning},
      {"10 inference exactness", engine_exactness},
      {"11 determinism", determinism},
      {"12 car buyer", car_buyer},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    Verdict v;
    try {
      v = cr.run();
    } catch (const std::exception& e) {
      v = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::kPass   ? "PASS"
                      : v.outcome == Outcome::kSkip ? "SKIP"
                                                    : "FAIL";
    failed += v.outcome == Outcome::kFail;
    std::printf("%s  %s: %s\n", tag, cr.name, v.detail.c_str());
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
