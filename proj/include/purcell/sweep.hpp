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

// Batch parameter sweeps with metric extraction and CSV/JSON output.
//
// Axis names are SystemSpec keys plus these derived axes:
//   C               cooperativity, applied by setting g = sqrt(C kappa gamma / 4)
//   Delta_a_over_J  cavity detuning in units of J
//   J_keep_ratios   J, with delta and Delta_a rescaled to keep delta/J and
//                   Delta_a/J fixed
//   t               time grid, only in evolve mode
// Axes are applied in order, so "C" after a "kappa" axis uses the new kappa.
// A variant may alias an axis name to a different key, which lets one plan
// sweep a different channel per variant.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "purcell/model.hpp"

namespace purcell {

enum class AxisScale { linear, log };

struct SweepAxis {
  std::string name;
  AxisScale scale = AxisScale::linear;
  double start = 0.0;
  double stop = 1.0;
  int points = 2;

  std::vector<double> values() const;
  bool operator==(const SweepAxis&) const = default;
};

enum class SolverKind { full, pim, effective };
enum class SweepMode { steady, evolve };
/// fixed: use the SystemSpec drive. P_opt: set P to the closed-form optimum at
/// every point. scan: numerically maximize the first metric over whichever
/// drive (P or Omega) is nonzero in the SystemSpec.
enum class DriveRule { fixed, P_opt, scan };

const char* to_string(SolverKind s);
const char* to_string(SweepMode m);
const char* to_string(DriveRule r);
SolverKind solver_kind_from_string(const std::string& s);

/// A named parameter set run under the same axes; its rows carry the label.
struct SweepVariant {
  std::string label;
  nlohmann::json overrides = nlohmann::json::object();
  std::optional<DriveRule> drive_rule;
  std::map<std::string, std::string> aliases;

  bool operator==(const SweepVariant&) const = default;
};

struct SweepPlan {
  std::string name;
  SystemSpec base;
  std::vector<SweepAxis> axes;
  std::vector<std::string> metrics;
  SolverKind solver = SolverKind::full;
  SweepMode mode = SweepMode::steady;
  DriveRule drive_rule = DriveRule::fixed;
  std::vector<SweepVariant> variants;
  /// Evolve mode: "ground" (all emitters in |g>, cavity empty) or "excited"
  /// (all emitters in |e>, cavity empty).
  std::string initial_state = "ground";
  std::uint64_t seed = 12345;

  /// Throws PlanError before any compute.
  void validate() const;
  std::size_t row_count() const;

  bool operator==(const SweepPlan&) const = default;
};

const std::vector<std::string>& known_metrics();

nlohmann::json plan_to_json(const SweepPlan& plan);
SweepPlan plan_from_json(const nlohmann::json& j);

/// Figure recipes: fig1c, fig1d, fig2a, fig2b, fig3c, fig3d, sm_s1 .. sm_s5.
/// Default resolutions are about 4x coarser than `full_res`.
SweepPlan preset_plan(const std::string& name, bool full_res = false);
std::vector<std::string> preset_plan_names();

struct GateFlags {
  bool J_kappa = false;
  bool kappa_GammaP = false;
  bool GammaP_gamma = false;
  bool GammaP_P = false;

  bool all() const { return J_kappa && kappa_GammaP && GammaP_gamma && GammaP_P; }
  bool operator==(const GateFlags&) const = default;
};

struct SweepRow {
  std::string variant;
  std::vector<double> axis_values;
  /// One entry per plan metric, NaN when that metric failed.
  std::vector<double> metrics;
  GateFlags gates;
  /// "ok" or the error code of the first failure.
  std::string status = "ok";
  std::string message;

  bool ok() const { return status == "ok"; }
};

/// NaN compares equal to NaN.
bool operator==(const SweepRow& a, const SweepRow& b);

struct SweepResult {
  SweepPlan plan;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<SweepRow> rows;

  bool all_ok() const;
  bool operator==(const SweepResult&) const = default;
};

struct RunOptions {
  /// Worker threads; 0 reads PURCELL_SIM_THREADS, falling back to 1.
  int jobs = 0;
};

int default_jobs();

SweepResult run_sweep(const SweepPlan& plan, const RunOptions& opts = {});

/// One point outside any plan, with the same metric semantics as a sweep row.
SweepRow evaluate_point(const SystemSpec& spec, SolverKind solver, const std::vector<std::string>& metrics,
                        DriveRule rule = DriveRule::fixed, std::uint64_t seed = 12345);

/// Metrics that make sense for this spec and solver.
std::vector<std::string> applicable_metrics(const SystemSpec& spec, SolverKind solver);

/// CSV: optional variant column, axes, metrics, four gate flags, status.
std::string emit_csv(const SweepResult& result);
nlohmann::json emit_json(const SweepResult& result);
SweepResult result_from_json(const nlohmann::json& j);

enum class OutputFormat { csv, json };
OutputFormat output_format_from_string(const std::string& s);
std::string emit(const SweepResult& result, OutputFormat format);
/// Writes to `path`; I/O failures raise std::runtime_error with the system
/// message.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace purcell
