#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include <json.hpp>

#include "idrefine/idrefine.h"

namespace {

struct StringDeleter {
  void operator()(char* s) const { idr_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct DiagramDeleter {
  void operator()(idr_diagram* d) const { idr_diagram_free(d); }
};
using OwnedDiagram = std::unique_ptr<idr_diagram, DiagramDeleter>;

struct RunDeleter {
  void operator()(idr_run* r) const { idr_run_free(r); }
};
using OwnedRun = std::unique_ptr<idr_run, RunDeleter>;

OwnedDiagram fixture(const char* name) {
  idr_diagram* d = nullptr;
  REQUIRE(idr_diagram_fixture(name, &d) == IDR_OK);
  return OwnedDiagram(d);
}

std::string take(char* s) { return OwnedString(s).get(); }

}  // namespace

TEST_CASE("version and status names") {
  CHECK(idr_abi_version() == IDR_ABI_VERSION);
  CHECK(std::strcmp(idr_status_name(IDR_OK), "ok") == 0);
  CHECK(std::strlen(idr_status_name(IDR_ERR_PARSE)) > 0);
  CHECK(std::strlen(idr_status_name(static_cast<idr_status>(99))) > 0);
}

TEST_CASE("parse errors and validation") {
  idr_diagram* d = nullptr;
  const char bad[] = "{\"nodes\": [";
  CHECK(idr_diagram_parse(bad, sizeof bad - 1, 1, &d) == IDR_ERR_PARSE);
  CHECK(d == nullptr);
  CHECK(std::strlen(idr_last_error_message()) > 0);

  OwnedDiagram w = fixture("mini-weather");
  char* text = nullptr;
  REQUIRE(idr_diagram_to_json(w.get(), &text) == IDR_OK);
  std::string json = take(text);
  std::string broken = json;
  const auto pos = broken.find("0.9");
  REQUIRE(pos != std::string::npos);
  broken.replace(pos, 3, "0.8");
  CHECK(idr_diagram_parse(broken.data(), broken.size(), 1, &d) ==
        IDR_ERR_VALIDATION);
  REQUIRE(idr_diagram_parse(broken.data(), broken.size(), 0, &d) == IDR_OK);
  OwnedDiagram unchecked(d);
  int ok = 1;
  char* report = nullptr;
  REQUIRE(idr_diagram_validate(unchecked.get(), &ok, &report) == IDR_OK);
  CHECK(ok == 0);
  auto r = nlohmann::json::parse(take(report));
  CHECK(r["ok"] == false);
  CHECK(r["violations"].size() >= 1);

  CHECK(idr_diagram_load("/nonexistent/file.json", 1, &d) == IDR_ERR_IO);
  CHECK(idr_diagram_fixture("nope", &d) == IDR_ERR_ARGUMENT);
  CHECK(idr_diagram_parse(nullptr, 0, 1, &d) == IDR_ERR_ARGUMENT);
}

TEST_CASE("fixtures and decisions") {
  char* names = nullptr;
  REQUIRE(idr_fixture_names(&names) == IDR_OK);
  CHECK(take(names).find("mini-weather") != std::string::npos);
  OwnedDiagram cb = fixture("car-buyer-structure");
  char* decisions = nullptr;
  REQUIRE(idr_diagram_decisions(cb.get(), &decisions) == IDR_OK);
  CHECK(take(decisions) == "Test1 Test2 Buy");
}

TEST_CASE("solve mini-weather") {
  OwnedDiagram w = fixture("mini-weather");
  idr_refine_options opts;
  idr_refine_options_init(&opts);
  idr_run* run = nullptr;
  REQUIRE(idr_solve(w.get(), "D", &opts, &run) == IDR_OK);
  OwnedRun owned(run);
  CHECK(idr_run_stage_count(run) == 1);
  CHECK(idr_run_value(run) == doctest::Approx(0.812).epsilon(1e-12));

  char* csv = nullptr;
  REQUIRE(idr_run_trace_csv(run, 0, &csv) == IDR_OK);
  std::string trace = take(csv);
  CHECK(trace.rfind(
            "iteration,fine_queries,passes,internal_vertices,leaves,"
            "value_normalized,value_raw\n",
            0) == 0);
  CHECK(idr_run_trace_csv(run, 1, &csv) == IDR_ERR_ARGUMENT);

  char* policy = nullptr;
  REQUIRE(idr_run_policy_json(run, &policy) == IDR_OK);
  auto p = nlohmann::json::parse(take(policy));
  CHECK(p["decisions"][0]["decision"] == "D");
  CHECK(p["decisions"][0]["tree"]["var"] == "R");

  char* summary = nullptr;
  REQUIRE(idr_run_summary_json(run, &summary) == IDR_OK);
  auto s = nlohmann::json::parse(take(summary));
  CHECK(s["baseline_bn_computations"] == 2);
  CHECK(std::abs(s["oracle_gap"].get<double>()) < 1e-9);
}

TEST_CASE("solve errors") {
  OwnedDiagram w = fixture("mini-weather");
  idr_refine_options opts;
  idr_refine_options_init(&opts);
  idr_run* run = nullptr;
  CHECK(idr_solve(w.get(), "W", &opts, &run) == IDR_ERR_ARGUMENT);
  CHECK(idr_solve(w.get(), "nope", &opts, &run) == IDR_ERR_ARGUMENT);
  CHECK(run == nullptr);
  opts.leaf = 7;
  CHECK(idr_solve(w.get(), "D", &opts, &run) == IDR_ERR_ARGUMENT);
  CHECK(idr_solve(nullptr, "D", nullptr, &run) == IDR_ERR_ARGUMENT);
}

TEST_CASE("sweep and oracle on a two-stage diagram") {
  idr_diagram* d = nullptr;
  REQUIRE(idr_diagram_generate(2, 5, 2, 1, &d) == IDR_OK);
  OwnedDiagram g(d);
  idr_refine_options opts;
  idr_refine_options_init(&opts);
  idr_stage_options first{"d1", opts};
  first.options.max_extensions = 0;
  first.options.run_to_complete = 0;
  idr_run* run = nullptr;
  REQUIRE(idr_sweep(g.get(), &opts, &first, 1, &run) == IDR_OK);
  OwnedRun owned(run);
  REQUIRE(idr_run_stage_count(run) == 2);
  char* name = nullptr;
  REQUIRE(idr_run_stage_decision(run, 0, &name) == IDR_OK);
  CHECK(take(name) == "d2");
  auto p = [&] {
    char* j = nullptr;
    REQUIRE(idr_run_policy_json(run, &j) == IDR_OK);
    return nlohmann::json::parse(take(j));
  }();
  CHECK(p["decisions"][0]["tree"].contains("action"));

  char* oracle = nullptr;
  REQUIRE(idr_oracle(g.get(), nullptr, 1u << 20, &oracle) == IDR_OK);
  auto o = nlohmann::json::parse(take(oracle));
  CHECK(o["value_normalized"].get<double>() >= idr_run_value(run) - 1e-12);

  CHECK(idr_oracle(g.get(), nullptr, 4, &oracle) == IDR_ERR_LIMIT);
}
