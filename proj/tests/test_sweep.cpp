// Copyright 2026 The purcell-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "purcell/sweep.hpp"
#include "test_util.hpp"

using namespace purcell;
using purcell::testing::Rng;

namespace {

SweepPlan small_plan() {
  SweepPlan p;
  p.name = "small";
  p.base = preset_spec("fig1");
  p.axes = {{"C", AxisScale::log, 10.0, 1000.0, 3}, {"P", AxisScale::log, 10.0, 100.0, 3}};
  p.metrics = {"concurrence", "fidelity_S", "n_cav"};
  return p;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

SweepVariant labeled(const std::string& label) {
  SweepVariant v;
  v.label = label;
  return v;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("a 3 x 3 plan yields nine rows with the last axis fastest") {
  const SweepPlan p = small_plan();
  CHECK(p.row_count() == 9);
  const SweepResult r = run_sweep(p, {.jobs = 1});
  REQUIRE(r.rows.size() == 9);
  CHECK(r.all_ok());
  CHECK(r.rows[0].axis_values == std::vector<double>{10.0, 10.0});
  CHECK(r.rows[1].axis_values[1] == doctest::Approx(std::sqrt(1000.0)));
  CHECK(r.rows[3].axis_values[0] == doctest::Approx(100.0));
  CHECK(r.rows[8].axis_values == std::vector<double>{1000.0, 100.0});
  for (const SweepRow& row : r.rows) {
    REQUIRE(row.metrics.size() == 3);
    CHECK(row.metrics[0] >= 0.0);
    CHECK(row.metrics[1] <= 1.0);
    CHECK(row.metrics[2] > 0.0);
  }
  CHECK(r.metadata.at("rows") == 9);
  CHECK(r.metadata.at("failed_rows") == 0);

  const auto csv = read_csv(emit_csv(r));
  REQUIRE(csv.size() == 10);
  CHECK(csv[0] == std::vector<std::string>{"C", "P", "concurrence", "fidelity_S", "n_cav", "gate_J_kappa",
                                           "gate_kappa_GammaP", "gate_GammaP_gamma", "gate_GammaP_P", "status"});
  for (std::size_t i = 1; i < csv.size(); ++i) CHECK(csv[i].back() == "ok");
}

TEST_CASE("plans survive a JSON round trip") {
  for (const std::string& name : preset_plan_names()) {
    CAPTURE(name);
    for (bool full : {false, true}) {
      const SweepPlan p = preset_plan(name, full);
      CHECK_NOTHROW(p.validate());
      CHECK(plan_from_json(plan_to_json(p)) == p);
      CHECK(plan_from_json(nlohmann::json::parse(plan_to_json(p).dump())) == p);
    }
  }
  CHECK(preset_plan("fig2a", true).row_count() > preset_plan("fig2a").row_count());
  CHECK_THROWS_AS(preset_plan("fig9"), PlanError);
}

TEST_CASE("results survive a JSON round trip, NaN included") {
  SweepPlan p = small_plan();
  p.base.g = 0.0;
  p.axes = {{"P", AxisScale::log, 1.0, 10.0, 2}};
  p.metrics = {"fidelity_S", "g2_0"};
  const SweepResult r = run_sweep(p, {.jobs = 1});
  // An empty cavity has no photon statistics: the row fails, the other metric survives.
  REQUIRE(r.rows.size() == 2);
  CHECK_FALSE(r.rows[0].ok());
  CHECK(std::isnan(r.rows[0].metrics[1]));
  CHECK(std::isfinite(r.rows[0].metrics[0]));
  CHECK_FALSE(r.all_ok());
  const SweepResult back = result_from_json(nlohmann::json::parse(emit_json(r).dump()));
  CHECK(back == r);
  CHECK(emit_csv(back) == emit_csv(r));
}

TEST_CASE("reruns are byte-identical and independent of the thread count") {
  const SweepPlan p = small_plan();
  const std::string a = emit_csv(run_sweep(p, {.jobs = 1}));
  const std::string b = emit_csv(run_sweep(p, {.jobs = 1}));
  const std::string c = emit_csv(run_sweep(p, {.jobs = 3}));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(emit(run_sweep(p, {.jobs = 2}), OutputFormat::json) == emit(run_sweep(p, {.jobs = 1}), OutputFormat::json));
}

TEST_CASE("invalid plans are rejected before any compute") {
  const auto rejects = [](auto mutate) {
    SweepPlan p = small_plan();
    mutate(p);
    CHECK_THROWS_AS(p.validate(), PlanError);
    CHECK_THROWS_AS(run_sweep(p), PlanError);
  };
  rejects([](SweepPlan& p) { p.name = ""; });
  rejects([](SweepPlan& p) { p.base.kappa = -1.0; });
  rejects([](SweepPlan& p) { p.axes[1].name = "C"; });
  rejects([](SweepPlan& p) { p.axes[0].points = 1; });
  rejects([](SweepPlan& p) { p.axes[0].start = 0.0; });
  rejects([](SweepPlan& p) { p.axes[0].stop = INFINITY; });
  rejects([](SweepPlan& p) { p.axes.push_back({"kappa", AxisScale::linear, 1, 2, 2}); });
  rejects([](SweepPlan& p) { p.axes.clear(); });
  rejects([](SweepPlan& p) { p.metrics.clear(); });
  rejects([](SweepPlan& p) { p.metrics.push_back("entropy"); });
  rejects([](SweepPlan& p) { p.metrics.push_back("fidelity_S"); });
  rejects([](SweepPlan& p) { p.solver = SolverKind::effective; });  // n_cav needs the cavity
  rejects([](SweepPlan& p) { p.initial_state = "thermal"; });
  rejects([](SweepPlan& p) { p.axes.push_back({"t", AxisScale::linear, 0, 1, 3}); });
  rejects([](SweepPlan& p) {
    p.mode = SweepMode::evolve;
    p.axes = {{"t", AxisScale::linear, 1, 0.5, 3}};
  });
  rejects([](SweepPlan& p) {
    p.mode = SweepMode::evolve;
    p.axes = {{"t", AxisScale::linear, 0, 1, 3}, {"P", AxisScale::log, 1, 10, 2}};
  });
  rejects([](SweepPlan& p) { p.variants = {labeled("a"), labeled("a")}; });
  rejects([](SweepPlan& p) { p.variants = {labeled("bad label")}; });
  CHECK_THROWS_AS(plan_from_json(nlohmann::json::parse(R"({"name": "x"})")), PlanError);
  CHECK_THROWS_AS(solver_kind_from_string("exact"), PlanError);
}

TEST_CASE("evolve mode emits one row per time point") {
  SweepPlan p = small_plan();
  p.mode = SweepMode::evolve;
  p.axes = {{"P", AxisScale::log, 10.0, 100.0, 2}, {"t", AxisScale::log, 1e-3, 0.3, 8}};
  p.metrics = {"fidelity_S"};
  const SweepResult r = run_sweep(p, {.jobs = 1});
  REQUIRE(r.rows.size() == 16);
  CHECK(r.all_ok());
  // Starting from the ground state the population of |S> builds up.
  CHECK(r.rows[7].metrics[0] > r.rows[0].metrics[0]);
  CHECK(r.rows[15].metrics[0] > 0.5);
}

TEST_CASE("effective solver tracks the full solver where the hierarchy holds") {
  SweepPlan p;
  p.name = "spot";
  p.base = preset_spec("fig1");
  p.base.kappa = 5e3;  // J / kappa = 18.4
  p.axes = {{"C", AxisScale::log, 1.0, 1e4, 21}, {"P", AxisScale::log, 1e-1, 1e4, 21}};
  p.metrics = {"concurrence", "fidelity_S"};
  const SweepResult eff = [&] {
    SweepPlan q = p;
    q.solver = SolverKind::effective;
    return run_sweep(q, {.jobs = 1});
  }();
  std::vector<std::size_t> gated;
  for (std::size_t i = 0; i < eff.rows.size(); ++i)
    if (eff.rows[i].gates.all()) gated.push_back(i);
  REQUIRE(gated.size() >= 5);

  Rng rng(8);
  for (int k = 0; k < 5; ++k) {
    const std::size_t i = gated[std::uniform_int_distribution<std::size_t>(0, gated.size() - 1)(rng)];
    SystemSpec s = p.base;
    s.g = std::sqrt(eff.rows[i].axis_values[0] * s.kappa * s.gamma / 4.0);
    s.P = eff.rows[i].axis_values[1];
    const SweepRow full = evaluate_point(s, SolverKind::full, p.metrics);
    CAPTURE(i);
    REQUIRE(full.ok());
    CHECK(full.gates == eff.rows[i].gates);
    CHECK(std::abs(full.metrics[0] - eff.rows[i].metrics[0]) <= 0.05);
    CHECK(std::abs(full.metrics[1] - eff.rows[i].metrics[1]) <= 0.05);
  }
}

TEST_CASE("fig2a matches the dense reference grid") {
  const SweepResult r = run_sweep(preset_plan("fig2a"));
  REQUIRE(r.all_ok());
  const auto ours = read_csv(emit_csv(r));
  const auto ref = read_csv(slurp(std::string(PURCELL_GOLDEN_DIR) + "/fig2a_golden.csv"));
  REQUIRE(ours.size() == ref.size());
  REQUIRE(ref.size() == 442);
  // The reference carries the axes and metrics; gates and status are ours only.
  for (std::size_t c = 0; c < ref[0].size(); ++c) CHECK(ours[0][c] == ref[0][c]);
  double worst = 0.0;
  for (std::size_t i = 1; i < ref.size(); ++i) {
    for (std::size_t c = 0; c < ref[i].size(); ++c) {
      const double want = std::stod(ref[i][c]);
      const double got = std::stod(ours[i][c]);
      const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
      worst = std::max(worst, err);
      if (err > 1e-6) {
        CAPTURE(i);
        CAPTURE(ref[0][c]);
        CHECK(got == doctest::Approx(want));
      }
    }
  }
  MESSAGE("largest deviation from the dense reference: " << worst);
  CHECK(worst <= 1e-6);
}

TEST_CASE("evaluate_point and applicable metrics") {
  const SweepRow row = evaluate_point(preset_spec("fig1"), SolverKind::full, {"fidelity_S", "analytic_rho_S"});
  REQUIRE(row.ok());
  CHECK(std::abs(row.metrics[0] - row.metrics[1]) < 0.03);
  CHECK(row.gates.kappa_GammaP);
  CHECK_FALSE(row.gates.J_kappa);

  const auto m5 = applicable_metrics(preset_spec("w5"), SolverKind::pim);
  CHECK(std::find(m5.begin(), m5.end(), "fidelity_W") != m5.end());
  CHECK(std::find(m5.begin(), m5.end(), "concurrence") == m5.end());
  const auto me = applicable_metrics(preset_spec("fig1"), SolverKind::effective);
  CHECK(std::find(me.begin(), me.end(), "n_cav") == me.end());
  CHECK_THROWS_AS(evaluate_point(preset_spec("fig1"), SolverKind::full, {"nope"}), PlanError);
}

TEST_CASE("output helpers") {
  CHECK(output_format_from_string("csv") == OutputFormat::csv);
  CHECK(output_format_from_string("json") == OutputFormat::json);
  CHECK_THROWS(output_format_from_string("xml"));
  CHECK_THROWS_AS(write_text_file("/nonexistent-dir/x.csv", "x"), std::runtime_error);
}
