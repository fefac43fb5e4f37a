#include "idrefine/idrefine.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "idrefine/diagram.hpp"
#include "idrefine/error.hpp"
#include "idrefine/harness.hpp"
#include "idrefine/multistage.hpp"
#include "idrefine/policy_tree.hpp"
#include "idrefine/refine.hpp"

using namespace idrefine;

struct idr_diagram {
  InfluenceDiagram diagram;
};

struct idr_run {
  std::vector<std::pair<std::string, std::string>> stages;  // decision, csv
  std::string policy;
  std::string summary;
  double value = 0.0;
};

namespace {

thread_local std::string last_error;

idr_status fail(idr_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename Body>
idr_status guarded(Body body) {
  try {
    last_error.clear();
    body();
    return IDR_OK;
  } catch (const ParseError& e) {
    std::string msg = e.what();
    if (e.offset() != ParseError::npos) {
      msg += " (byte " + std::to_string(e.offset()) + ")";
    }
    return fail(IDR_ERR_PARSE, msg);
  } catch (const ValidationError& e) {
    return fail(IDR_ERR_VALIDATION, e.what());
  } catch (const ZeroProbabilityError& e) {
    return fail(IDR_ERR_ZERO_PROBABILITY, e.what());
  } catch (const ArgumentError& e) {
    return fail(IDR_ERR_ARGUMENT, e.what());
  } catch (const LimitError& e) {
    return fail(IDR_ERR_LIMIT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(IDR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IDR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(IDR_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is null");
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure(std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RefinementConfig to_config(const idr_refine_options& o) {
  RefinementConfig c;
  if (o.leaf != IDR_LEAF_POSTHOC && o.leaf != IDR_LEAF_RANDOM) {
    throw ArgumentError("unknown leaf strategy");
  }
  if (o.extension != IDR_EXT_GREEDY && o.extension != IDR_EXT_RANDOM) {
    throw ArgumentError("unknown extension strategy");
  }
  c.leaf = o.leaf == IDR_LEAF_POSTHOC ? LeafStrategy::kPostHoc
                                      : LeafStrategy::kRandom;
  c.extension = o.extension == IDR_EXT_GREEDY ? ExtensionStrategy::kGreedy
                                              : ExtensionStrategy::kRandom;
  c.seed = o.seed;
  StoppingRule stop;
  if (o.max_extensions >= 0) {
    stop.max_extensions = static_cast<std::uint64_t>(o.max_extensions);
  }
  if (o.max_fine_queries >= 0) {
    stop.max_fine_queries = static_cast<std::uint64_t>(o.max_fine_queries);
  }
  if (o.max_passes >= 0) {
    stop.max_passes = static_cast<std::uint64_t>(o.max_passes);
  }
  if (o.has_min_evi) stop.min_evi = o.min_evi;
  stop.run_to_complete = o.run_to_complete != 0;
  if (!stop.max_extensions && !stop.max_fine_queries && !stop.max_passes &&
      !stop.min_evi) {
    stop.run_to_complete = true;
  }
  c.stop = stop;
  return c;
}

std::size_t to_cap(std::uint64_t cap) {
  return static_cast<std::size_t>(cap);
}

nlohmann::ordered_json oracle_json(const InfluenceDiagram& g,
                                   const OracleResult& r) {
  nlohmann::ordered_json out;
  const NodeId d = r.decision;
  out["decision"] = g.node(d).name;
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (NodeId p : g.node(d).parents) preds.push_back(g.node(p).name);
  out["predecessors"] = std::move(preds);
  InformationStates states = information_states(g, d);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t s = 0; s < states.size(); ++s) {
    nlohmann::ordered_json row;
    nlohmann::ordered_json state = nlohmann::ordered_json::object();
    const Evidence assignment = states.at(s);
    for (const Finding& f : assignment.findings()) {
      state[g.node(f.variable).name] = g.node(f.variable).outcomes[f.outcome];
    }
    row["state"] = std::move(state);
    row["action"] = g.node(d).outcomes[r.table[s]];
    row["probability"] = r.state_probabilities[s];
    row["value"] = r.per_state_values[s];
    rows.push_back(std::move(row));
  }
  out["table"] = std::move(rows);
  out["value_normalized"] = r.value;
  out["value_raw"] = r.value_raw;
  out["baseline_bn_computations"] = states.size();
  return out;
}

}  // namespace

extern "C" {

int idr_abi_version(void) { return IDR_ABI_VERSION; }

const char* idr_status_name(idr_status status) {
  switch (status) {
    case IDR_OK:
      return "ok";
    case IDR_ERR_PARSE:
      return "parse error";
    case IDR_ERR_VALIDATION:
      return "validation error";
    case IDR_ERR_ZERO_PROBABILITY:
      return "zero probability";
    case IDR_ERR_ARGUMENT:
      return "invalid argument";
    case IDR_ERR_LIMIT:
      return "limit exceeded";
    case IDR_ERR_IO:
      return "i/o error";
    case IDR_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* idr_last_error_message(void) { return last_error.c_str(); }

void idr_string_free(char* s) { std::free(s); }

idr_status idr_diagram_parse(const char* text, size_t length, int validate,
                             idr_diagram** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    std::string_view view(text, length);
    auto* d = new idr_diagram{validate ? parse_diagram(view)
                                       : parse_diagram_unchecked(view)};
    *out = d;
  });
}

idr_status idr_diagram_load(const char* path, int validate,
                            idr_diagram** out) {
  std::string text;
  try {
    require(path, "path");
    text = read_file(path);
  } catch (const ArgumentError& e) {
    return fail(IDR_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(IDR_ERR_IO, e.what());
  }
  return idr_diagram_parse(text.data(), text.size(), validate, out);
}

idr_status idr_diagram_fixture(const char* name, idr_diagram** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = new idr_diagram{fixture(name)};
  });
}

idr_status idr_fixture_names(char** out) {
  return guarded([&] {
    require(out, "out");
    std::string names;
    for (auto n : fixture_names()) {
      if (!names.empty()) names += ' ';
      names += n;
    }
    *out = copy_string(names);
  });
}

idr_status idr_diagram_generate(size_t n, uint64_t seed, size_t arity,
                                int two_stage, idr_diagram** out) {
  return guarded([&] {
    require(out, "out");
    GeneratorSpec spec{n, seed, arity};
    *out = new idr_diagram{two_stage ? gen_two_stage(spec)
                                     : gen_random_id(spec)};
  });
}

idr_status idr_diagram_load_car_buyer(const char* path, idr_diagram** out) {
  std::string text;
  try {
    require(path, "path");
    text = read_file(path);
  } catch (const ArgumentError& e) {
    return fail(IDR_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(IDR_ERR_IO, e.what());
  }
  return guarded([&] {
    require(out, "out");
    *out = new idr_diagram{load_car_buyer(text)};
  });
}

void idr_diagram_free(idr_diagram* diagram) { delete diagram; }

idr_status idr_diagram_validate(const idr_diagram* diagram, int* ok,
                                char** report_json) {
  return guarded([&] {
    require(diagram, "diagram");
    const ValidationReport report = validate(diagram->diagram);
    if (ok) *ok = report.ok() ? 1 : 0;
    if (report_json) {
      nlohmann::ordered_json j;
      j["ok"] = report.ok();
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const Violation& v : report.violations) {
        list.push_back({{"kind", to_string(v.kind)}, {"message", v.message}});
      }
      j["violations"] = std::move(list);
      *report_json = copy_string(j.dump(1) + "\n");
    }
  });
}

idr_status idr_diagram_to_json(const idr_diagram* diagram, char** out) {
  return guarded([&] {
    require(diagram, "diagram");
    require(out, "out");
    *out = copy_string(serialize_diagram(diagram->diagram));
  });
}

idr_status idr_diagram_decisions(const idr_diagram* diagram, char** out) {
  return guarded([&] {
    require(diagram, "diagram");
    require(out, "out");
    std::string names;
    for (NodeId d : diagram->diagram.decision_order()) {
      if (!names.empty()) names += ' ';
      names += diagram->diagram.node(d).name;
    }
    *out = copy_string(names);
  });
}

void idr_refine_options_init(idr_refine_options* options) {
  if (!options) return;
  options->leaf = IDR_LEAF_POSTHOC;
  options->extension = IDR_EXT_GREEDY;
  options->seed = 0;
  options->max_extensions = -1;
  options->max_fine_queries = -1;
  options->max_passes = -1;
  options->has_min_evi = 0;
  options->min_evi = 0.0;
  options->run_to_complete = 0;
  options->oracle_cap = kDefaultEnumerationCap;
}

idr_status idr_solve(const idr_diagram* diagram, const char* decision,
                     const idr_refine_options* options, idr_run** out) {
  return guarded([&] {
    require(diagram, "diagram");
    require(decision, "decision");
    require(options, "options");
    require(out, "out");
    const InfluenceDiagram& g = diagram->diagram;
    const NodeId d = g.require_decision(decision);
    ProfileReport report =
        run_profile(g, d, to_config(*options), to_cap(options->oracle_cap));

    MultistagePolicy policy;
    const DecisionTree& tree = report.run.tree;
    policy.policies.push_back(CompiledPolicy{
        d, tree, tree.used_predecessors(), contingency_table(tree, g)});
    policy.value = report.summary["final_value_normalized"].get<double>();
    policy.value_raw = report.summary["final_value_raw"].get<double>();

    auto run = std::make_unique<idr_run>();
    run->stages.emplace_back(g.node(d).name, report.run.trace.to_csv());
    run->policy = policy_to_json(policy, g).dump(1) + "\n";
    run->summary = report.summary.dump(1) + "\n";
    run->value = policy.value;
    *out = run.release();
  });
}

idr_status idr_sweep(const idr_diagram* diagram,
                     const idr_refine_options* defaults,
                     const idr_stage_options* stages, size_t stage_count,
                     idr_run** out) {
  return guarded([&] {
    require(diagram, "diagram");
    require(defaults, "defaults");
    require(out, "out");
    if (stage_count > 0) require(stages, "stages");
    const InfluenceDiagram& g = diagram->diagram;

    std::map<NodeId, RefinementConfig> per_stage;
    for (size_t i = 0; i < stage_count; ++i) {
      require(stages[i].decision, "stage decision");
      per_stage[g.require_decision(stages[i].decision)] =
          to_config(stages[i].options);
    }
    const RefinementConfig fallback = to_config(*defaults);
    SweepReport report = run_sweep_profile(
        g,
        [&](NodeId d) {
          auto it = per_stage.find(d);
          return it == per_stage.end() ? fallback : it->second;
        },
        to_cap(defaults->oracle_cap));

    auto run = std::make_unique<idr_run>();
    for (const StageResult& st : report.sweep.stages) {
      run->stages.emplace_back(g.node(st.decision).name, st.trace.to_csv());
    }
    run->policy = policy_to_json(report.sweep.policy, g).dump(1) + "\n";
    run->summary = report.summary.dump(1) + "\n";
    run->value = report.sweep.policy.value;
    *out = run.release();
  });
}

void idr_run_free(idr_run* run) { delete run; }

size_t idr_run_stage_count(const idr_run* run) {
  return run ? run->stages.size() : 0;
}

idr_status idr_run_stage_decision(const idr_run* run, size_t stage,
                                  char** name) {
  return guarded([&] {
    require(run, "run");
    require(name, "name");
    if (stage >= run->stages.size()) throw ArgumentError("no such stage");
    *name = copy_string(run->stages[stage].first);
  });
}

idr_status idr_run_trace_csv(const idr_run* run, size_t stage, char** csv) {
  return guarded([&] {
    require(run, "run");
    require(csv, "csv");
    if (stage >= run->stages.size()) throw ArgumentError("no such stage");
    *csv = copy_string(run->stages[stage].second);
  });
}

idr_status idr_run_policy_json(const idr_run* run, char** json) {
  return guarded([&] {
    require(run, "run");
    require(json, "json");
    *json = copy_string(run->policy);
  });
}

idr_status idr_run_summary_json(const idr_run* run, char** json) {
  return guarded([&] {
    require(run, "run");
    require(json, "json");
    *json = copy_string(run->summary);
  });
}

double idr_run_value(const idr_run* run) { return run ? run->value : 0.0; }

idr_status idr_oracle(const idr_diagram* diagram, const char* decision,
                      uint64_t cap, char** result_json) {
  return guarded([&] {
    require(diagram, "diagram");
    require(result_json, "result_json");
    const InfluenceDiagram& g = diagram->diagram;
    nlohmann::ordered_json out;
    if (decision) {
      out = oracle_json(g, oracle_optimal(g, g.require_decision(decision), {},
                                          to_cap(cap)));
    } else {
      MultistageOracleResult r = oracle_optimal_multistage(g, to_cap(cap));
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      std::size_t baseline = 0;
      for (const OracleResult& st : r.stages) {
        list.push_back(oracle_json(g, st));
        baseline += information_states(g, st.decision).size();
      }
      out["decisions"] = std::move(list);
      out["value_normalized"] = r.value;
      out["value_raw"] = r.value_raw;
      out["baseline_bn_computations"] = baseline;
    }
    *result_json = copy_string(out.dump(1) + "\n");
  });
}

}  // extern "C"
