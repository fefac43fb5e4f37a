// Command-line front end over the C API.
//
// Exit codes: 0 success, 1 invalid input (parse or validation failure),
// 2 any other runtime error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "idrefine/idrefine.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  int code;
  std::string message;
};

int exit_code(idr_status s) {
  return s == IDR_ERR_PARSE || s == IDR_ERR_VALIDATION ? kExitInvalid
                                                       : kExitRuntime;
}

void check(idr_status s) {
  if (s != IDR_OK) {
    throw Failure{exit_code(s), std::string(idr_status_name(s)) + ": " +
                                    idr_last_error_message()};
  }
}

struct StringDeleter {
  void operator()(char* p) const { idr_string_free(p); }
};
struct DiagramDeleter {
  void operator()(idr_diagram* p) const { idr_diagram_free(p); }
};
struct RunDeleter {
  void operator()(idr_run* p) const { idr_run_free(p); }
};
using Diagram = std::unique_ptr<idr_diagram, DiagramDeleter>;
using Run = std::unique_ptr<idr_run, RunDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, StringDeleter> owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Failure{kExitRuntime, "cannot write " + path};
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

// A path, or fixture:NAME for a built-in fixture.
Diagram load(const std::string& source, bool validate = true) {
  idr_diagram* d = nullptr;
  const std::string prefix = "fixture:";
  if (source.rfind(prefix, 0) == 0) {
    check(idr_diagram_fixture(source.substr(prefix.size()).c_str(), &d));
  } else {
    check(idr_diagram_load(source.c_str(), validate ? 1 : 0, &d));
  }
  return Diagram(d);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < s.size()) {
    std::size_t end = s.find(' ', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string last_decision(const idr_diagram* d) {
  char* names = nullptr;
  check(idr_diagram_decisions(d, &names));
  auto list = split_words(take(names));
  if (list.empty()) throw Failure{kExitInvalid, "diagram has no decisions"};
  return list.back();
}

struct RefineFlags {
  std::string leaf = "posthoc";
  std::string ext = "greedy";
  std::uint64_t seed = 0;
  std::optional<std::int64_t> max_ext;
  std::optional<std::int64_t> max_passes;
  std::optional<std::int64_t> max_fine;
  std::optional<double> min_evi;
  bool complete = false;

  void add_to(CLI::App* app) {
    app->add_option("--leaf", leaf, "Leaf selection")
        ->check(CLI::IsMember({"posthoc", "random"}));
    app->add_option("--ext", ext, "Extension choice")
        ->check(CLI::IsMember({"greedy", "random"}));
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--max-ext", max_ext, "Stop after N extensions")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-passes", max_passes, "Stop after N passes")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-fine", max_fine, "Stop after N fine queries")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--min-evi", min_evi,
                    "Stop when the best gain drops below E (greedy)");
    app->add_flag("--complete", complete, "Run until the tree is complete");
  }

  idr_refine_options options() const {
    idr_refine_options o;
    idr_refine_options_init(&o);
    o.leaf = leaf == "posthoc" ? IDR_LEAF_POSTHOC : IDR_LEAF_RANDOM;
    o.extension = ext == "greedy" ? IDR_EXT_GREEDY : IDR_EXT_RANDOM;
    o.seed = seed;
    if (max_ext) o.max_extensions = *max_ext;
    if (max_passes) o.max_passes = *max_passes;
    if (max_fine) o.max_fine_queries = *max_fine;
    if (min_evi) {
      o.has_min_evi = 1;
      o.min_evi = *min_evi;
    }
    o.run_to_complete = complete ? 1 : 0;
    return o;
  }
};

// NAME=KIND:N with KIND one of ext, passes, fine, evi.
idr_stage_options parse_budget(const std::string& spec,
                               const idr_refine_options& base,
                               std::string& name_storage) {
  const auto eq = spec.find('=');
  const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || colon == std::string::npos || eq == 0) {
    throw Failure{kExitRuntime, "budget must look like NAME=KIND:N: " + spec};
  }
  name_storage = spec.substr(0, eq);
  const std::string kind = spec.substr(eq + 1, colon - eq - 1);
  const std::string amount = spec.substr(colon + 1);
  idr_stage_options st;
  st.options = base;
  st.options.run_to_complete = 0;
  st.options.max_extensions = -1;
  st.options.max_passes = -1;
  st.options.max_fine_queries = -1;
  st.options.has_min_evi = 0;
  try {
    std::size_t used = 0;
    if (kind == "evi") {
      st.options.has_min_evi = 1;
      st.options.min_evi = std::stod(amount, &used);
    } else {
      const long long n = std::stoll(amount, &used);
      if (n < 0) throw std::invalid_argument("negative");
      if (kind == "ext") {
        st.options.max_extensions = n;
      } else if (kind == "passes") {
        st.options.max_passes = n;
      } else if (kind == "fine") {
        st.options.max_fine_queries = n;
      } else {
        throw Failure{kExitRuntime, "unknown budget kind: " + kind};
      }
    }
    if (used != amount.size()) throw std::invalid_argument("trailing text");
  } catch (const std::invalid_argument&) {
    throw Failure{kExitRuntime, "bad budget amount: " + spec};
  } catch (const std::out_of_range&) {
    throw Failure{kExitRuntime, "bad budget amount: " + spec};
  }
  return st;
}

std::string stage_trace_path(const std::string& base, const std::string& d) {
  const auto dot = base.rfind('.');
  const auto slash = base.find_last_of('/');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash)) {
    return base + "." + d + ".csv";
  }
  return base.substr(0, dot) + "." + d + base.substr(dot);
}

void print_run(const idr_run* run) {
  std::printf("value_normalized=%.17g\n", idr_run_value(run));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anytime decision-tree policies for influence diagrams"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a diagram file");
  std::string validate_file;
  validate_cmd->add_option("file", validate_file, "Diagram JSON")->required();

  // solve / profile
  auto* solve_cmd = app.add_subcommand("solve", "Refine one decision");
  auto* profile_cmd =
      app.add_subcommand("profile", "Refine and summarize against the oracle");
  std::string solve_file, decision, trace_path, policy_path, summary_path;
  RefineFlags flags;
  std::uint64_t cap = 1u << 20;
  for (auto* cmd : {solve_cmd, profile_cmd}) {
    cmd->add_option("file", solve_file, "Diagram JSON or fixture:NAME")
        ->required();
    cmd->add_option("--decision", decision,
                    "Decision to refine (default: the last one)");
    flags.add_to(cmd);
    cmd->add_option("--trace", trace_path, "Anytime trace CSV");
    cmd->add_option("--policy", policy_path, "Policy JSON");
  }
  profile_cmd->add_option("--summary", summary_path,
                          "Summary JSON (default: stdout)");
  profile_cmd->add_option("--cap", cap, "Oracle enumeration cap");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep back over all decisions");
  std::vector<std::string> budgets;
  std::string sweep_summary;
  sweep_cmd->add_option("file", solve_file, "Diagram JSON or fixture:NAME")
      ->required();
  flags.add_to(sweep_cmd);
  sweep_cmd->add_option("--budget", budgets,
                        "Per-decision budget NAME=KIND:N, KIND in "
                        "ext|passes|fine|evi");
  sweep_cmd->add_option("--trace", trace_path,
                        "Trace CSV base; one file per decision");
  sweep_cmd->add_option("--policy", policy_path, "Policy JSON");
  sweep_cmd->add_option("--summary", sweep_summary, "Summary JSON");
  sweep_cmd->add_option("--cap", cap, "Oracle enumeration cap (0 skips)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimum by enumeration");
  std::string oracle_file, oracle_decision, oracle_out;
  oracle_cmd->add_option("file", oracle_file, "Diagram JSON or fixture:NAME")
      ->required();
  oracle_cmd->add_option("--decision", oracle_decision,
                         "Single decision (default: all, backward induction)");
  oracle_cmd->add_option("--cap", cap, "Enumeration cap");
  oracle_cmd->add_option("-o,--output", oracle_out, "Output file");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random diagram");
  std::size_t gen_n = 0, gen_arity = 2;
  std::uint64_t gen_seed = 0;
  bool gen_two_stage = false;
  std::string gen_out;
  gen_cmd->add_option("--n", gen_n, "Chance predecessors")->required();
  gen_cmd->add_option("--seed", gen_seed, "RNG seed")->required();
  gen_cmd->add_option("--arity", gen_arity, "Outcomes per predecessor");
  gen_cmd->add_flag("--two-stage", gen_two_stage, "Two decisions");
  gen_cmd->add_option("-o,--output", gen_out, "Output file (default: stdout)");

  // fixture
  auto* fixture_cmd = app.add_subcommand("fixture", "Write a built-in fixture");
  std::string fixture_name, fixture_out;
  fixture_cmd->add_option("name", fixture_name, "Fixture name")->required();
  fixture_cmd->add_option("-o,--output", fixture_out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitRuntime;
  }

  try {
    if (validate_cmd->parsed()) {
      Diagram d = load(validate_file, false);
      int ok = 0;
      char* report = nullptr;
      check(idr_diagram_validate(d.get(), &ok, &report));
      std::cout << take(report);
      return ok ? kExitOk : kExitInvalid;
    }

    if (solve_cmd->parsed() || profile_cmd->parsed()) {
      Diagram d = load(solve_file);
      if (decision.empty()) decision = last_decision(d.get());
      idr_refine_options o = flags.options();
      o.oracle_cap = profile_cmd->parsed() ? cap : 0;
      idr_run* raw = nullptr;
      check(idr_solve(d.get(), decision.c_str(), &o, &raw));
      Run run(raw);
      if (!trace_path.empty()) {
        char* csv = nullptr;
        check(idr_run_trace_csv(run.get(), 0, &csv));
        write_file(trace_path, take(csv));
      }
      if (!policy_path.empty()) {
        char* json = nullptr;
        check(idr_run_policy_json(run.get(), &json));
        write_file(policy_path, take(json));
      }
      if (profile_cmd->parsed()) {
        char* summary = nullptr;
        check(idr_run_summary_json(run.get(), &summary));
        emit(summary_path, take(summary));
      } else {
        print_run(run.get());
      }
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      Diagram d = load(solve_file);
      idr_refine_options base = flags.options();
      base.oracle_cap = cap;
      std::vector<std::string> names(budgets.size());
      std::vector<idr_stage_options> stages;
      for (std::size_t i = 0; i < budgets.size(); ++i) {
        stages.push_back(parse_budget(budgets[i], base, names[i]));
      }
      for (std::size_t i = 0; i < stages.size(); ++i) {
        stages[i].decision = names[i].c_str();
      }
      idr_run* raw = nullptr;
      check(idr_sweep(d.get(), &base, stages.data(), stages.size(), &raw));
      Run run(raw);
      if (!trace_path.empty()) {
        for (std::size_t s = 0; s < idr_run_stage_count(run.get()); ++s) {
          char* name = nullptr;
          char* csv = nullptr;
          check(idr_run_stage_decision(run.get(), s, &name));
          check(idr_run_trace_csv(run.get(), s, &csv));
          write_file(stage_trace_path(trace_path, take(name)), take(csv));
        }
      }
      if (!policy_path.empty()) {
        char* json = nullptr;
        check(idr_run_policy_json(run.get(), &json));
        write_file(policy_path, take(json));
      }
      if (!sweep_summary.empty()) {
        char* summary = nullptr;
        check(idr_run_summary_json(run.get(), &summary));
        write_file(sweep_summary, take(summary));
      }
      print_run(run.get());
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      Diagram d = load(oracle_file);
      char* json = nullptr;
      check(idr_oracle(d.get(),
                       oracle_decision.empty() ? nullptr
                                               : oracle_decision.c_str(),
                       cap, &json));
      emit(oracle_out, take(json));
      return kExitOk;
    }

    if (gen_cmd->parsed()) {
      idr_diagram* raw = nullptr;
      check(idr_diagram_generate(gen_n, gen_seed, gen_arity,
                                 gen_two_stage ? 1 : 0, &raw));
      Diagram d(raw);
      char* json = nullptr;
      check(idr_diagram_to_json(d.get(), &json));
      emit(gen_out, take(json));
      return kExitOk;
    }

    if (fixture_cmd->parsed()) {
      idr_diagram* raw = nullptr;
      check(idr_diagram_fixture(fixture_name.c_str(), &raw));
      Diagram d(raw);
      char* json = nullptr;
      check(idr_diagram_to_json(d.get(), &json));
      emit(fixture_out, take(json));
      return kExitOk;
    }
  } catch (const Failure& f) {
    std::cerr << "idrefine: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "idrefine: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
