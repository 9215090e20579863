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

// purcell-sim command line: steady states, trajectories, sweeps and a quick
// self-check of the numerical invariants.
//
// Exit codes: 0 success, 1 some point or check failed, 2 bad input.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "purcell/effective.hpp"
#include "purcell/errors.hpp"
#include "purcell/model.hpp"
#include "purcell/pim.hpp"
#include "purcell/solvers.hpp"
#include "purcell/sweep.hpp"

#ifndef PURCELL_VERSION
#define PURCELL_VERSION "unknown"
#endif

namespace {

using namespace purcell;
using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
}

// key=value pairs from --set, applied in order.
void apply_sets(SystemSpec& spec, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw SpecError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "model_kind") {
      spec.model_kind = model_kind_from_string(value);
      continue;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) throw SpecError("--set " + key + ": not a number: '" + value + "'");
    set_parameter(spec, key, v);
  }
  spec.validate();
}

struct SpecArgs {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
};

void add_spec_options(CLI::App* cmd, SpecArgs& a) {
  cmd->add_option("--preset", a.preset, "Named parameter set (see `presets`)");
  cmd->add_option("--config", a.config, "JSON system spec (flat key/value)");
  cmd->add_option("--set", a.sets, "Override a parameter, key=value (repeatable)");
}

SystemSpec resolve_spec(const SpecArgs& a) {
  SystemSpec spec = a.preset.empty() ? preset_spec("fig1") : preset_spec(a.preset);
  if (!a.config.empty()) spec = spec_from_json(read_json_file(a.config), spec);
  apply_sets(spec, a.sets);
  return spec;
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_text_file(out, text);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

DriveRule drive_rule_arg(const std::string& s) {
  if (s == "fixed") return DriveRule::fixed;
  if (s == "P_opt") return DriveRule::P_opt;
  if (s == "scan") return DriveRule::scan;
  throw PlanError("unknown drive rule '" + s + "'");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------- steady

int cmd_steady(const SpecArgs& sa, const std::string& solver, const std::string& metrics_arg,
               const std::string& drive, const std::string& format, const std::string& out) {
  const SystemSpec spec = resolve_spec(sa);
  const SolverKind kind = solver_kind_from_string(solver);
  const std::vector<std::string> metrics =
      metrics_arg.empty() ? applicable_metrics(spec, kind) : split_list(metrics_arg);
  const SweepRow row = evaluate_point(spec, kind, metrics, drive_rule_arg(drive));

  if (output_format_from_string(format) == OutputFormat::csv) {
    std::string text = "metric,value\n";
    char buf[64];
    for (std::size_t k = 0; k < metrics.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row.metrics[k]);
      text += metrics[k] + "," + buf + "\n";
    }
    text += "status," + row.status + "\n";
    write_output(out, text);
  } else {
    json j;
    j["spec"] = to_json(spec);
    j["solver"] = solver;
    j["metrics"] = json::object();
    for (std::size_t k = 0; k < metrics.size(); ++k) j["metrics"][metrics[k]] = number_or_null(row.metrics[k]);
    j["gates"] = {{"J_kappa", row.gates.J_kappa},
                  {"kappa_GammaP", row.gates.kappa_GammaP},
                  {"GammaP_gamma", row.gates.GammaP_gamma},
                  {"GammaP_P", row.gates.GammaP_P}};
    j["status"] = row.status;
    if (!row.message.empty()) j["message"] = row.message;
    if (spec.n_emitters == 2) j["warnings"] = validity_warnings(spec);
    write_output(out, j.dump(2) + "\n");
  }
  if (!row.ok()) std::cerr << "point failed [" << row.status << "]: " << row.message << "\n";
  return row.ok() ? 0 : 1;
}

// ---------------------------------------------------------------- evolve

int cmd_evolve(const SpecArgs& sa, const std::string& solver, const std::string& metrics_arg, double t_min,
               double t_max, int points, const std::string& initial, const std::string& format,
               const std::string& out) {
  SweepPlan plan;
  plan.name = "evolve";
  plan.base = resolve_spec(sa);
  plan.solver = solver_kind_from_string(solver);
  plan.mode = SweepMode::evolve;
  plan.initial_state = initial;
  plan.axes = {{"t", AxisScale::log, t_min, t_max, points}};
  if (metrics_arg.empty()) {
    for (const std::string& m : applicable_metrics(plan.base, plan.solver)) {
      if (m != "analytic_tau_S" && m != "analytic_P_opt") plan.metrics.push_back(m);
    }
  } else {
    plan.metrics = split_list(metrics_arg);
  }
  const SweepResult r = run_sweep(plan);
  write_output(out, emit(r, output_format_from_string(format)));
  return r.all_ok() ? 0 : 1;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const std::string& preset, const std::string& config, bool full_res, const std::string& solver,
              const std::vector<std::string>& sets, int jobs, const std::string& format, const std::string& out) {
  if (preset.empty() == config.empty()) throw PlanError("give exactly one of --preset or --config");
  SweepPlan plan = preset.empty() ? plan_from_json(read_json_file(config)) : preset_plan(preset, full_res);
  if (!solver.empty()) plan.solver = solver_kind_from_string(solver);
  apply_sets(plan.base, sets);
  plan.validate();
  RunOptions ro;
  ro.jobs = jobs;
  const SweepResult r = run_sweep(plan, ro);
  write_output(out, emit(r, output_format_from_string(format)));
  std::size_t failed = 0;
  for (const SweepRow& row : r.rows) failed += row.ok() ? 0 : 1;
  if (failed > 0) std::cerr << failed << " of " << r.rows.size() << " points failed\n";
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- presets

int cmd_presets(const std::string& show, bool full_res) {
  if (show.empty()) {
    std::cout << "system presets:\n";
    for (const std::string& n : preset_spec_names()) std::cout << "  " << n << "\n";
    std::cout << "sweep plans:\n";
    for (const std::string& n : preset_plan_names()) {
      const SweepPlan p = preset_plan(n);
      std::cout << "  " << n << " (" << p.row_count() << " rows, " << preset_plan(n, true).row_count()
                << " with --full-res)\n";
    }
    return 0;
  }
  const auto names = preset_spec_names();
  if (std::find(names.begin(), names.end(), show) != names.end()) {
    std::cout << to_json(preset_spec(show)).dump(2) << "\n";
  } else {
    std::cout << plan_to_json(preset_plan(show, full_res)).dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- check

int cmd_check(bool slow) {
  int failures = 0;
  const auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  };
  char buf[256];

  for (int N = 1; N <= 4; ++N) {
    const double d = local_map_discrepancy(N);
    std::snprintf(buf, sizeof buf, "max deviation %.2e (N=%d)", d, N);
    report(d <= 1e-10, "pim-local-maps", buf);
  }

  for (const std::string& name : preset_spec_names()) {
    if (name == "w50" && !slow) continue;
    const SystemSpec spec = preset_spec(name);
    try {
      if (spec.n_emitters == 2) {
        const LabeledOperator H = build_hamiltonian(spec);
        report(H.is_hermitian(1e-12), name + "-hermitian", "H = H^dag");
        const Liouvillian L = build_liouvillian(spec);
        SteadyOptions a, b;
        b.method = SteadyMethod::shifted_inverse_iteration;
        const SteadyStateResult ra = steady_state(L, a), rb = steady_state(L, b);
        const double td = trace_distance(ra.rho_ss.matrix(), rb.rho_ss.matrix());
        std::snprintf(buf, sizeof buf, "relative residuals %.1e / %.1e, trace distance %.1e",
                      ra.relative_residual, rb.relative_residual, td);
        report(ra.relative_residual <= 1e-9 && rb.relative_residual <= 1e-9 && td <= 1e-8, name + "-steady", buf);
      } else {
        const PimLiouvillian L = build_pim_liouvillian(spec);
        SteadyOptions a, b;
        b.method = SteadyMethod::shifted_inverse_iteration;
        const PimSteadyResult ra = pim_steady_state(L, a), rb = pim_steady_state(L, b);
        const double diff = (ra.state.coordinates() - rb.state.coordinates()).lpNorm<Eigen::Infinity>();
        std::snprintf(buf, sizeof buf, "relative residuals %.1e / %.1e, max coordinate difference %.1e",
                      ra.relative_residual, rb.relative_residual, diff);
        report(ra.relative_residual <= 1e-9 && rb.relative_residual <= 1e-9 && diff <= 1e-8,
               name + "-pim-steady", buf);
      }
    } catch (const Error& e) {
      report(false, name, std::string("[") + e.code() + "] " + e.what());
    }
  }
  std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"purcell-sim: frequency-resolved Purcell stabilization of entangled emitter states"};
  app.set_version_flag("--version", std::string(PURCELL_VERSION));
  app.require_subcommand(1);

  std::string solver = "full", metrics, format = "json", out, drive = "fixed";
  std::string format_sweep = "csv", initial = "ground", plan_preset, plan_config, show;
  SpecArgs spec_args;
  std::vector<std::string> plan_sets;
  double t_min = 1e-6, t_max = 10.0;
  int points = 141, jobs = 0;
  bool full_res = false, slow = false;

  const auto solver_opt = [&](CLI::App* c) {
    c->add_option("--solver", solver, "full, pim or effective")->check(CLI::IsMember({"full", "pim", "effective"}));
  };
  const auto out_opts = [&](CLI::App* c, std::string& fmt) {
    c->add_option("--format", fmt, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c->add_option("--out", out, "Output file (default stdout)");
  };

  CLI::App* steady = app.add_subcommand("steady", "Steady state of one parameter set");
  add_spec_options(steady, spec_args);
  solver_opt(steady);
  out_opts(steady, format);
  steady->add_option("--metrics", metrics, "Comma-separated metric list (default: all applicable)");
  steady->add_option("--drive", drive, "fixed, P_opt or scan")->check(CLI::IsMember({"fixed", "P_opt", "scan"}));

  CLI::App* evolve = app.add_subcommand("evolve", "Time evolution on a logarithmic grid");
  add_spec_options(evolve, spec_args);
  solver_opt(evolve);
  out_opts(evolve, format_sweep);
  evolve->add_option("--metrics", metrics, "Comma-separated metric list");
  evolve->add_option("--t-min", t_min, "First output time [1/gamma]");
  evolve->add_option("--t-max", t_max, "Last output time [1/gamma]");
  evolve->add_option("--points", points, "Number of output times");
  evolve->add_option("--initial", initial, "ground or excited")->check(CLI::IsMember({"ground", "excited"}));

  CLI::App* sweep = app.add_subcommand("sweep", "Run a sweep plan");
  sweep->add_option("--preset", plan_preset, "Named plan (see `presets`)");
  sweep->add_option("--config", plan_config, "JSON sweep plan");
  sweep->add_option("--set", plan_sets, "Override a base parameter, key=value (repeatable)");
  sweep->add_option("--solver", solver, "Override the plan's solver")->check(CLI::IsMember({"full", "pim", "effective"}));
  sweep->add_option("--jobs", jobs, "Worker threads (default: PURCELL_SIM_THREADS or 1)");
  sweep->add_flag("--full-res", full_res, "Publication-density grids for preset plans");
  out_opts(sweep, format_sweep);

  CLI::App* presets = app.add_subcommand("presets", "List or show presets");
  presets->add_option("--show", show, "Print one system preset or plan as JSON");
  presets->add_flag("--full-res", full_res, "Show the full-resolution plan");

  CLI::App* check = app.add_subcommand("check", "Run the numerical self-checks");
  check->add_flag("--slow", slow, "Include the N = 50 preset");

  CLI11_PARSE(app, argc, argv);

  // `sweep --solver` should only override when given.
  const bool sweep_solver_given = sweep->count("--solver") > 0;
  try {
    if (*steady) return cmd_steady(spec_args, solver, metrics, drive, format, out);
    if (*evolve) return cmd_evolve(spec_args, solver, metrics, t_min, t_max, points, initial, format_sweep, out);
    if (*sweep) {
      return cmd_sweep(plan_preset, plan_config, full_res, sweep_solver_given ? solver : "", plan_sets, jobs,
                       format_sweep, out);
    }
    if (*presets) return cmd_presets(show, full_res);
    if (*check) return cmd_check(slow);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
