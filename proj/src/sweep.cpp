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

#include "purcell/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include "purcell/effective.hpp"
#include "purcell/errors.hpp"
#include "purcell/metrics.hpp"
#include "purcell/pim.hpp"
#include "purcell/solvers.hpp"

#ifndef PURCELL_VERSION
#define PURCELL_VERSION "unknown"
#endif

namespace purcell {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// PIM problems above this many coordinates use shifted inverse iteration:
// the trace row makes sparse LU fill in badly.
constexpr std::size_t kPimIterativeAbove = 4096;

const std::set<std::string>& derived_axes() {
  static const std::set<std::string> s = {"C", "Delta_a_over_J", "J_keep_ratios"};
  return s;
}

bool needs_two_emitters(const std::string& metric) {
  return metric == "concurrence" || metric == "fidelity_S" || metric == "fidelity_A" ||
         metric.rfind("analytic_", 0) == 0;
}

bool needs_cavity(const std::string& metric) {
  return metric == "fidelity_W_heralded" || metric == "n_cav" || metric == "g2_0";
}

void apply_axis(SystemSpec& spec, const std::string& key, double v) {
  if (key == "C") {
    if (!(v >= 0.0)) throw SpecError("cooperativity must be non-negative");
    spec.g = std::sqrt(v * spec.kappa * spec.gamma / 4.0);
  } else if (key == "Delta_a_over_J") {
    spec.Delta_a = v * spec.J;
  } else if (key == "J_keep_ratios") {
    if (spec.J == 0.0) throw SpecError("J_keep_ratios needs a nonzero base J");
    const double r = v / spec.J;
    spec.delta *= r;
    spec.Delta_a *= r;
    spec.J = v;
  } else {
    set_parameter(spec, key, v);
  }
}

std::string resolve(const SweepVariant* variant, const std::string& axis) {
  if (variant != nullptr) {
    const auto it = variant->aliases.find(axis);
    if (it != variant->aliases.end()) return it->second;
  }
  return axis;
}

AxisScale scale_from_string(const std::string& s) {
  if (s == "linear") return AxisScale::linear;
  if (s == "log") return AxisScale::log;
  throw PlanError("unknown axis scale '" + s + "'");
}

SweepMode mode_from_string(const std::string& s) {
  if (s == "steady") return SweepMode::steady;
  if (s == "evolve") return SweepMode::evolve;
  throw PlanError("unknown mode '" + s + "'");
}

DriveRule drive_rule_from_string(const std::string& s) {
  if (s == "fixed") return DriveRule::fixed;
  if (s == "P_opt") return DriveRule::P_opt;
  if (s == "scan") return DriveRule::scan;
  throw PlanError("unknown drive rule '" + s + "'");
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& what) {
  if (!j.is_object()) throw PlanError(what + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw PlanError("unknown key '" + it.key() + "' in " + what);
    }
  }
}

bool valid_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

// ---------------------------------------------------------------- evaluation

// Whatever the chosen solver produced for one spec (and one time).
struct Solved {
  const SystemSpec* spec = nullptr;
  std::optional<DensityMatrix> full;
  std::optional<PimState> pim;
  std::optional<DensityMatrix> emitters;  // effective solver
  double t = -1.0;                         // evolve mode only
};

DensityMatrix emitter_state(const Solved& s) {
  if (s.full) return reduce_to_emitters(*s.full);
  if (s.pim) return reduce_to_emitters(pim_to_full(*s.pim));
  return *s.emitters;
}

void require_pair(const SystemSpec& spec, const std::string& metric) {
  if (spec.n_emitters != 2) throw UnsupportedModel(metric + " needs exactly two emitters");
}

double evaluate(const std::string& metric, const Solved& s) {
  const SystemSpec& spec = *s.spec;
  if (needs_two_emitters(metric)) require_pair(spec, metric);
  if (metric == "concurrence") return concurrence(emitter_state(s));
  if (metric == "fidelity_S") return fidelity(emitter_state(s), target_S());
  if (metric == "fidelity_A") return fidelity(emitter_state(s), target_A());
  if (metric == "fidelity_W") {
    if (s.pim) return pim_fidelity(*s.pim, dicke_target(spec.n_emitters, DickeTarget::W));
    return fidelity(emitter_state(s), target_W(spec.n_emitters));
  }
  if (metric == "fidelity_W_heralded") {
    if (s.pim) {
      return pim_fidelity(pim_conditional_state(*s.pim), dicke_target(spec.n_emitters, DickeTarget::W));
    }
    const SubsystemLayout& layout = s.full->layout();
    const LabeledOperator a = embed(ops::destroy(spec.n_max + 1), spec.n_emitters, layout);
    return fidelity(reduce_to_emitters(conditional_state(*s.full, a)), target_W(spec.n_emitters));
  }
  if (metric == "n_cav") return s.pim ? pim_cavity_population(*s.pim) : cavity_population(*s.full);
  if (metric == "g2_0") return s.pim ? pim_g2_zero(*s.pim) : g2_zero(*s.full);
  if (metric == "analytic_rho_S" || metric == "analytic_tau_S") {
    if (!(spec.P > 0.0)) throw UnsupportedModel(metric + " is defined for incoherent pumping only");
    const CascadedPrediction c = cascaded_prediction(spec, DriveMode::incoherent);
    if (metric == "analytic_tau_S") return 1.0 / c.inv_tau;
    return s.t >= 0.0 ? c.rho_S_at(s.t) : c.rho_S_simplified;
  }
  if (metric == "analytic_P_opt") return optimal_pump(spec).P_opt;
  throw PlanError("unknown metric '" + metric + "'");
}

void fill_metrics(const std::vector<std::string>& metrics, const Solved& s, SweepRow& row) {
  row.metrics.assign(metrics.size(), kNaN);
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    try {
      row.metrics[k] = evaluate(metrics[k], s);
    } catch (const Error& e) {
      if (row.ok()) {
        row.status = e.code();
        row.message = metrics[k] + ": " + e.what();
      }
    }
  }
}

SteadyOptions steady_options(const SweepPlan& plan) {
  SteadyOptions o;
  o.seed = plan.seed;
  return o;
}

Solved solve_steady(const SystemSpec& spec, const SweepPlan& plan) {
  Solved s;
  s.spec = &spec;
  SteadyOptions opts = steady_options(plan);
  switch (plan.solver) {
    case SolverKind::full:
      s.full = steady_state(build_liouvillian(spec), opts).rho_ss;
      break;
    case SolverKind::pim: {
      const PimLiouvillian L = build_pim_liouvillian(spec);
      if (L.coords.size() > kPimIterativeAbove) opts.method = SteadyMethod::shifted_inverse_iteration;
      s.pim = pim_steady_state(L, opts).state;
      break;
    }
    case SolverKind::effective:
      s.emitters = steady_state(effective_liouvillian(spec), opts).rho_ss;
      break;
  }
  return s;
}

// The drive actually applied at a point.
SystemSpec with_drive(SystemSpec spec, DriveRule rule, const SweepPlan& plan) {
  if (rule == DriveRule::P_opt) {
    spec.P = optimal_pump(spec).P_opt;
  } else if (rule == DriveRule::scan) {
    const bool coherent = spec.P == 0.0 && spec.Omega > 0.0;
    const double lo = coherent ? 1e1 : 1e-1, hi = coherent ? 1e6 : 1e5;
    const std::string& metric = plan.metrics.front();
    const auto f = [&](double x) {
      SystemSpec t = spec;
      (coherent ? t.Omega : t.P) = x;
      try {
        const double v = evaluate(metric, solve_steady(t, plan));
        return std::isfinite(v) ? v : -1.0;
      } catch (const Error&) {
        return -1.0;
      }
    };
    const ScanResult best = log_scan_argmax(f, lo, hi, 6, true);
    (coherent ? spec.Omega : spec.P) = best.argmax;
  }
  spec.validate();
  return spec;
}

GateFlags gates_of(const SystemSpec& spec) {
  const HierarchyGates h = hierarchy_gates(spec);
  return {h.J_kappa, h.kappa_GammaP, h.GammaP_gamma, h.GammaP_P};
}

void mark_failed(SweepRow& row, std::size_t n_metrics, const std::string& code, const std::string& msg) {
  row.metrics.assign(n_metrics, kNaN);
  row.status = code;
  row.message = msg;
}

// One task = one variant and one point of the non-time axes. In evolve mode
// it fills one row per time.
struct Task {
  const SweepVariant* variant = nullptr;
  std::vector<double> values;  // per plan axis, NaN in the time slot
  std::size_t first_row = 0;
};

void run_task(const SweepPlan& plan, const Task& task, const std::vector<double>& times, int t_axis,
              std::vector<SweepRow>& rows) {
  const std::size_t n_rows = plan.mode == SweepMode::evolve ? times.size() : 1;
  for (std::size_t r = 0; r < n_rows; ++r) {
    SweepRow& row = rows[task.first_row + r];
    row.variant = task.variant != nullptr ? task.variant->label : "";
    row.axis_values = task.values;
    if (t_axis >= 0) row.axis_values[static_cast<std::size_t>(t_axis)] = times[r];
  }
  const auto fail_all = [&](const std::string& code, const std::string& msg) {
    for (std::size_t r = 0; r < n_rows; ++r) mark_failed(rows[task.first_row + r], plan.metrics.size(), code, msg);
  };
  try {
    SystemSpec spec = plan.base;
    if (task.variant != nullptr) spec = spec_from_json(task.variant->overrides, spec);
    for (std::size_t a = 0; a < plan.axes.size(); ++a) {
      if (static_cast<int>(a) == t_axis) continue;
      apply_axis(spec, resolve(task.variant, plan.axes[a].name), task.values[a]);
    }
    spec.validate();
    const DriveRule rule =
        task.variant != nullptr && task.variant->drive_rule ? *task.variant->drive_rule : plan.drive_rule;
    spec = with_drive(spec, rule, plan);
    GateFlags gates;
    try {
      gates = gates_of(spec);
    } catch (const Error&) {
    }
    for (std::size_t r = 0; r < n_rows; ++r) rows[task.first_row + r].gates = gates;

    if (plan.mode == SweepMode::steady) {
      fill_metrics(plan.metrics, solve_steady(spec, plan), rows[task.first_row]);
      return;
    }

    EvolveOptions eo;
    eo.keep_states = false;
    std::vector<std::optional<Solved>> per_time(times.size());
    const auto emit_row = [&](std::size_t i, Solved s) {
      s.spec = &spec;
      s.t = times[i];
      fill_metrics(plan.metrics, s, rows[task.first_row + i]);
    };
    switch (plan.solver) {
      case SolverKind::full:
      case SolverKind::effective: {
        const bool full = plan.solver == SolverKind::full;
        const Liouvillian L = full ? build_liouvillian(spec) : effective_liouvillian(spec);
        const SubsystemLayout layout = L.layout();
        // Emitter sites come first; any cavity site stays in vacuum.
        std::vector<int> occ(static_cast<std::size_t>(layout.sites()), 0);
        if (plan.initial_state == "excited") {
          for (int k = 0; k < spec.n_emitters; ++k) occ[static_cast<std::size_t>(k)] = 1;
        }
        const DensityMatrix rho0 = DensityMatrix::basis_state(layout, occ);
        const Index d = layout.total_dim();
        const Vector y0 = Eigen::Map<const Vector>(rho0.matrix().data(), d * d);
        const StateTolerance tol{1e-7, 1e-7, -1e-6};
        propagate_by_sector(L.superop(), coherence_degrees(L), y0, times, eo,
                            [&](std::size_t i, const Vector& y) {
          DenseMatrix m = Eigen::Map<const DenseMatrix>(y.data(), d, d);
          m = 0.5 * (m + m.adjoint()).eval();
          Solved s;
          if (full) s.full = DensityMatrix(layout, m, tol); else s.emitters = DensityMatrix(layout, m, tol);
          emit_row(i, std::move(s));
        });
        break;
      }
      case SolverKind::pim: {
        const PimLiouvillian L = build_pim_liouvillian(spec);
        Vector start = pim_ground_state(L.space).coordinates();
        if (plan.initial_state == "excited") {
          // |N/2, N/2> is the top state of the j = N/2 block, cavity empty.
          start.setZero();
          start(L.space.flat(0, 0, 0, 0, 0)) = 1.0;
        }
        Vector y0(static_cast<Index>(L.coords.size()));
        for (std::size_t k = 0; k < L.coords.size(); ++k) y0(static_cast<Index>(k)) = start(L.coords[k]);
        propagate(L.superop, y0, times, eo, [&](std::size_t i, const Vector& y) {
          Vector full = Vector::Zero(L.space.size());
          for (std::size_t k = 0; k < L.coords.size(); ++k) full(L.coords[k]) = y(static_cast<Index>(k));
          Solved s;
          s.pim = PimState(L.space, full);
          emit_row(i, std::move(s));
        });
        break;
      }
    }
  } catch (const Error& e) {
    fail_all(e.code(), e.what());
  } catch (const std::exception& e) {
    fail_all("internal_error", e.what());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_from_json(const nlohmann::json& j) {
  return j.is_null() ? kNaN : j.get<double>();
}

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_numbers(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), same_number);
}

}  // namespace

// ---------------------------------------------------------------- plan

std::vector<double> SweepAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(points, 0)));
  if (points < 2) return v;
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    v[static_cast<std::size_t>(i)] =
        scale == AxisScale::linear
            ? start + f * (stop - start)
            : std::pow(10.0, std::log10(start) + f * (std::log10(stop) - std::log10(start)));
  }
  v.front() = start;
  v.back() = stop;
  return v;
}

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::full: return "full";
    case SolverKind::pim: return "pim";
    default: return "effective";
  }
}

const char* to_string(SweepMode m) { return m == SweepMode::steady ? "steady" : "evolve"; }

const char* to_string(DriveRule r) {
  switch (r) {
    case DriveRule::fixed: return "fixed";
    case DriveRule::P_opt: return "P_opt";
    default: return "scan";
  }
}

SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "full") return SolverKind::full;
  if (s == "pim") return SolverKind::pim;
  if (s == "effective") return SolverKind::effective;
  throw PlanError("unknown solver '" + s + "'");
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> m = {
      "concurrence", "fidelity_S", "fidelity_A",     "fidelity_W",     "fidelity_W_heralded",
      "n_cav",       "g2_0",       "analytic_rho_S", "analytic_tau_S", "analytic_P_opt"};
  return m;
}

void SweepPlan::validate() const {
  if (!valid_label(name)) throw PlanError("plan name must be a non-empty identifier");
  try {
    base.validate();
  } catch (const Error& e) {
    throw PlanError(std::string("base spec: ") + e.what());
  }
  int time_axes = 0;
  std::set<std::string> seen;
  for (const SweepAxis& a : axes) {
    if (!seen.insert(a.name).second) throw PlanError("axis '" + a.name + "' appears twice");
    if (a.points < 2) throw PlanError("axis '" + a.name + "' needs at least 2 points");
    if (!std::isfinite(a.start) || !std::isfinite(a.stop)) throw PlanError("axis '" + a.name + "' bounds must be finite");
    if (a.scale == AxisScale::log && !(a.start > 0.0 && a.stop > 0.0)) {
      throw PlanError("log axis '" + a.name + "' needs positive bounds");
    }
    if (a.name == "t") {
      ++time_axes;
      if (mode != SweepMode::evolve) throw PlanError("the time axis is only valid in evolve mode");
      if (!(a.start >= 0.0 && a.stop > a.start)) throw PlanError("time axis must increase from t >= 0");
    }
  }
  if (mode == SweepMode::evolve && (time_axes != 1 || axes.back().name != "t")) {
    throw PlanError("evolve mode needs one 't' axis, placed last");
  }
  const int param_axes = static_cast<int>(axes.size()) - time_axes;
  if (param_axes < (mode == SweepMode::evolve ? 0 : 1) || param_axes > 2) {
    throw PlanError("a plan sweeps one or two parameters");
  }
  if (metrics.empty()) throw PlanError("no metrics requested");
  std::set<std::string> mseen;
  for (const std::string& m : metrics) {
    if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end()) {
      throw PlanError("unknown metric '" + m + "'");
    }
    if (!mseen.insert(m).second) throw PlanError("metric '" + m + "' requested twice");
    if (solver == SolverKind::effective && needs_cavity(m)) {
      throw PlanError(m + " needs a cavity; the effective solver eliminates it");
    }
  }
  if (initial_state != "ground" && initial_state != "excited") {
    throw PlanError("initial_state must be 'ground' or 'excited'");
  }
  if (mode == SweepMode::evolve && drive_rule == DriveRule::scan) {
    throw PlanError("drive scans are only defined for steady states");
  }

  std::set<std::string> labels;
  std::vector<const SweepVariant*> vs;
  for (const SweepVariant& v : variants) {
    if (!valid_label(v.label)) throw PlanError("variant labels must be non-empty identifiers");
    if (!labels.insert(v.label).second) throw PlanError("variant '" + v.label + "' appears twice");
    if (mode == SweepMode::evolve && v.drive_rule == DriveRule::scan) {
      throw PlanError("drive scans are only defined for steady states");
    }
    vs.push_back(&v);
  }
  if (vs.empty()) vs.push_back(nullptr);
  const bool sweeps_size = std::any_of(axes.begin(), axes.end(), [&](const SweepAxis& a) {
    return a.name == "n_emitters";
  });
  for (const SweepVariant* v : vs) {
    const std::string where = v != nullptr ? " (variant " + v->label + ")" : "";
    SystemSpec spec = base;
    try {
      if (v != nullptr) spec = spec_from_json(v->overrides, base);
    } catch (const Error& e) {
      throw PlanError("variant " + v->label + ": " + e.what());
    }
    for (const SweepAxis& a : axes) {
      if (a.name == "t") continue;
      const std::string key = resolve(v, a.name);
      if (!is_parameter(key) && derived_axes().count(key) == 0) {
        throw PlanError("axis '" + key + "' is not a system parameter" + where);
      }
    }
    if (!sweeps_size) {
      for (const std::string& m : metrics) {
        if (needs_two_emitters(m) && spec.n_emitters != 2) {
          throw PlanError(m + " needs exactly two emitters" + where);
        }
      }
      if (solver == SolverKind::effective && spec.n_emitters != 2) {
        throw PlanError("the effective solver needs exactly two emitters" + where);
      }
    }
    if (solver == SolverKind::pim && spec.model_kind == ModelKind::dimer && spec.delta != 0.0) {
      throw PlanError("the pim solver needs identical emitters (delta = 0)" + where);
    }
  }
}

std::size_t SweepPlan::row_count() const {
  std::size_t n = std::max<std::size_t>(variants.size(), 1);
  for (const SweepAxis& a : axes) n *= static_cast<std::size_t>(std::max(a.points, 0));
  return n;
}

nlohmann::json plan_to_json(const SweepPlan& plan) {
  nlohmann::json j;
  j["name"] = plan.name;
  j["base"] = to_json(plan.base);
  j["axes"] = nlohmann::json::array();
  for (const SweepAxis& a : plan.axes) {
    j["axes"].push_back({{"name", a.name},
                         {"scale", a.scale == AxisScale::linear ? "linear" : "log"},
                         {"start", a.start},
                         {"stop", a.stop},
                         {"points", a.points}});
  }
  j["metrics"] = plan.metrics;
  j["solver"] = to_string(plan.solver);
  j["mode"] = to_string(plan.mode);
  j["drive_rule"] = to_string(plan.drive_rule);
  j["variants"] = nlohmann::json::array();
  for (const SweepVariant& v : plan.variants) {
    nlohmann::json jv = {{"label", v.label}, {"overrides", v.overrides}};
    if (v.drive_rule) jv["drive_rule"] = to_string(*v.drive_rule);
    if (!v.aliases.empty()) jv["aliases"] = v.aliases;
    j["variants"].push_back(jv);
  }
  j["initial_state"] = plan.initial_state;
  j["seed"] = plan.seed;
  return j;
}

SweepPlan plan_from_json(const nlohmann::json& j) {
  require_keys(j, {"name", "base", "base_preset", "axes", "metrics", "solver", "mode", "drive_rule", "variants", "initial_state", "seed"},
               "sweep plan");
  try {
    SweepPlan p;
    p.name = j.value("name", std::string("sweep"));
    if (j.contains("base_preset")) p.base = preset_spec(j.at("base_preset").get<std::string>());
    if (j.contains("base")) p.base = spec_from_json(j.at("base"), p.base);
    if (!j.contains("axes") || !j.at("axes").is_array()) throw PlanError("plan needs an 'axes' array");
    for (const auto& ja : j.at("axes")) {
      require_keys(ja, {"name", "scale", "start", "stop", "points"}, "axis");
      SweepAxis a;
      a.name = ja.at("name").get<std::string>();
      a.scale = scale_from_string(ja.value("scale", std::string("linear")));
      a.start = ja.at("start").get<double>();
      a.stop = ja.at("stop").get<double>();
      a.points = ja.at("points").get<int>();
      p.axes.push_back(a);
    }
    if (!j.contains("metrics")) throw PlanError("plan needs a 'metrics' list");
    p.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("solver")) p.solver = solver_kind_from_string(j.at("solver").get<std::string>());
    if (j.contains("mode")) p.mode = mode_from_string(j.at("mode").get<std::string>());
    if (j.contains("drive_rule")) p.drive_rule = drive_rule_from_string(j.at("drive_rule").get<std::string>());
    if (j.contains("variants")) {
      for (const auto& jv : j.at("variants")) {
        require_keys(jv, {"label", "overrides", "drive_rule", "aliases"}, "variant");
        SweepVariant v;
        v.label = jv.at("label").get<std::string>();
        if (jv.contains("overrides")) v.overrides = jv.at("overrides");
        if (jv.contains("drive_rule")) v.drive_rule = drive_rule_from_string(jv.at("drive_rule").get<std::string>());
        if (jv.contains("aliases")) v.aliases = jv.at("aliases").get<std::map<std::string, std::string>>();
        p.variants.push_back(std::move(v));
      }
    }
    if (j.contains("initial_state")) p.initial_state = j.at("initial_state").get<std::string>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw PlanError(std::string("malformed plan: ") + e.what());
  } catch (const SpecError& e) {
    throw PlanError(e.what());
  }
}

// ---------------------------------------------------------------- presets

namespace {

SweepAxis axis(const std::string& name, AxisScale scale, double a, double b, int reduced, int full,
               bool full_res) {
  return {name, scale, a, b, full_res ? full : reduced};
}

SweepVariant variant(const std::string& label, nlohmann::json overrides,
                     std::optional<DriveRule> rule = std::nullopt,
                     std::map<std::string, std::string> aliases = {}) {
  return {label, std::move(overrides), rule, std::move(aliases)};
}

// Spec overrides that turn `base` into an N-emitter W-state setup at the
// top-of-ladder resonance.
nlohmann::json ladder(int N, double J) {
  return {{"n_emitters", N}, {"J", J}, {"Delta_a", J * (2.0 - N)}};
}

}  // namespace

SweepPlan preset_plan(const std::string& name, bool full_res) {
  using S = AxisScale;
  SweepPlan p;
  p.name = name;
  const nlohmann::json coherent = {{"P", 0.0}, {"Omega", 1e4}};
  if (name == "fig1c") {
    p.base = preset_spec("fig1");
    p.axes = {axis("Delta_a_over_J", S::linear, -1.5, 1.5, 61, 301, full_res)};
    p.metrics = {"concurrence", "fidelity_S", "fidelity_A", "n_cav"};
    p.variants = {variant("incoherent", nlohmann::json::object()), variant("coherent", coherent)};
  } else if (name == "fig1d") {
    p.base = preset_spec("fig1");
    p.mode = SweepMode::evolve;
    p.axes = {axis("t", S::log, 1e-6, 10.0, 36, 141, full_res)};
    p.metrics = {"fidelity_S", "fidelity_A", "concurrence", "analytic_rho_S"};
  } else if (name == "fig2a") {
    p.base = preset_spec("fig1");
    p.axes = {axis("C", S::log, 1.0, 1e4, 21, 81, full_res), axis("P", S::log, 1e-1, 1e4, 21, 81, full_res)};
    p.metrics = {"concurrence", "fidelity_S", "analytic_rho_S", "analytic_P_opt"};
  } else if (name == "fig2b") {
    p.base = preset_spec("fig1_coherent");
    p.axes = {axis("C", S::log, 1.0, 1e4, 21, 81, full_res), axis("Omega", S::log, 1e2, 1e6, 21, 81, full_res)};
    p.metrics = {"concurrence", "fidelity_S", "fidelity_A"};
  } else if (name == "fig3c") {
    p.base = preset_spec("w5");
    p.solver = SolverKind::pim;
    p.axes = {axis("Delta_a_over_J", S::linear, -6.0, 0.0, 25, 97, full_res)};
    p.metrics = {"fidelity_W", "fidelity_W_heralded", "n_cav", "g2_0"};
    p.variants = {variant("J_1e5", to_json(preset_spec("w5"))),
                  variant("J_1e3", to_json(preset_spec("w5_weak_J")))};
  } else if (name == "fig3d") {
    p.base = preset_spec("w50");
    p.solver = SolverKind::pim;
    p.axes = {axis("C", S::log, 10.0, 1e4, 6, 21, full_res), axis("P", S::log, 10.0, 1e4, 6, 21, full_res)};
    p.metrics = {"fidelity_W", "fidelity_W_heralded"};
  } else if (name == "sm_s1") {
    p.base = preset_spec("fig1");
    p.base.delta = 1e-3 * p.base.J;
    p.axes = {axis("C", S::log, 1.0, 1e4, 11, 41, full_res),
              axis("J_keep_ratios", S::log, 1e2, 1e6, 11, 41, full_res)};
    p.metrics = {"concurrence", "fidelity_S"};
    p.variants = {variant("incoherent", nlohmann::json::object(), DriveRule::P_opt),
                  variant("coherent", coherent, DriveRule::scan)};
  } else if (name == "sm_s2") {
    p.base = preset_spec("fig1");
    p.axes = {axis("C", S::log, 1.0, 1e4, 11, 41, full_res), axis("rate", S::log, 1e-1, 1e4, 11, 41, full_res)};
    p.metrics = {"concurrence"};
    for (const auto& [drive, over] : {std::pair<std::string, nlohmann::json>{"incoherent", nlohmann::json::object()},
                                      {"coherent", coherent}}) {
      for (const char* ch : {"Gamma_extra", "gamma_phi", "Gamma_phi"}) {
        p.variants.push_back(variant(drive + "_" + ch, over, std::nullopt, {{"rate", ch}}));
      }
    }
  } else if (name == "sm_s3") {
    p.base = preset_spec("w50");
    p.solver = SolverKind::pim;
    p.axes = {axis("C", S::log, 10.0, 1e4, 6, 21, full_res), axis("P", S::log, 1e-1, 1e4, 6, 21, full_res)};
    p.metrics = {"fidelity_W"};
    p.variants = {variant("N_3", ladder(3, 1e5)), variant("N_25", ladder(25, 1e5)), variant("N_50", ladder(50, 1e5))};
  } else if (name == "sm_s4") {
    p.base = preset_spec("w50");
    p.solver = SolverKind::pim;
    p.axes = {axis("C", S::log, 10.0, 1e4, 6, 21, full_res), axis("P", S::log, 1e-1, 1e4, 6, 21, full_res)};
    p.metrics = {"fidelity_W", "fidelity_W_heralded"};
    for (double J : {1e2, 1e3, 1e4, 1e5}) {
      char label[16];
      std::snprintf(label, sizeof label, "J_1e%d", static_cast<int>(std::lround(std::log10(J))));
      p.variants.push_back(variant(label, ladder(25, J)));
    }
  } else if (name == "sm_s5") {
    // Optical signatures of the dimer resonance, C = 500.
    p.base = preset_spec("fig1");
    p.base.kappa = 12500.0;
    p.base.g = 1250.0;
    p.base.P = 66.39;
    p.axes = {axis("Delta_a_over_J", S::linear, -3.0, 1.0, 41, 161, full_res)};
    p.metrics = {"fidelity_S", "n_cav", "g2_0"};
    p.variants = {variant("incoherent", nlohmann::json::object()),
                  variant("coherent", {{"P", 0.0}, {"Omega", 8504.99}})};
  } else {
    throw PlanError("unknown preset plan '" + name + "'");
  }
  p.validate();
  return p;
}

std::vector<std::string> preset_plan_names() {
  return {"fig1c", "fig1d", "fig2a", "fig2b", "fig3c", "fig3d", "sm_s1", "sm_s2", "sm_s3", "sm_s4", "sm_s5"};
}

// ---------------------------------------------------------------- run

bool operator==(const SweepRow& a, const SweepRow& b) {
  return a.variant == b.variant && same_numbers(a.axis_values, b.axis_values) &&
         same_numbers(a.metrics, b.metrics) && a.gates == b.gates && a.status == b.status &&
         a.message == b.message;
}

bool SweepResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok(); });
}

int default_jobs() {
  if (const char* env = std::getenv("PURCELL_SIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

SweepResult run_sweep(const SweepPlan& plan, const RunOptions& opts) {
  plan.validate();
  SweepResult result;
  result.plan = plan;

  int t_axis = -1;
  for (std::size_t a = 0; a < plan.axes.size(); ++a) {
    if (plan.axes[a].name == "t") t_axis = static_cast<int>(a);
  }
  const std::vector<double> times = t_axis >= 0 ? plan.axes[static_cast<std::size_t>(t_axis)].values()
                                                : std::vector<double>{};

  // Row order: variant, then axes with the last axis fastest.
  std::vector<std::vector<double>> axis_values;
  for (const SweepAxis& a : plan.axes) axis_values.push_back(a.values());
  std::vector<const SweepVariant*> vs;
  for (const SweepVariant& v : plan.variants) vs.push_back(&v);
  if (vs.empty()) vs.push_back(nullptr);

  std::size_t per_variant = 1;
  for (const auto& v : axis_values) per_variant *= v.size();
  std::vector<Task> tasks;
  std::size_t row = 0;
  for (const SweepVariant* v : vs) {
    for (std::size_t k = 0; k < per_variant; ++k, ++row) {
      // Decode k with the last axis fastest.
      std::vector<std::size_t> idx(plan.axes.size());
      std::size_t rest = k;
      for (std::size_t a = plan.axes.size(); a-- > 0;) {
        idx[a] = rest % axis_values[a].size();
        rest /= axis_values[a].size();
      }
      if (t_axis >= 0 && idx[static_cast<std::size_t>(t_axis)] != 0) continue;
      Task t;
      t.variant = v;
      t.first_row = row;
      for (std::size_t a = 0; a < plan.axes.size(); ++a) t.values.push_back(axis_values[a][idx[a]]);
      tasks.push_back(std::move(t));
    }
  }
  result.rows.resize(row);

  const int jobs = std::max(1, std::min<int>(opts.jobs > 0 ? opts.jobs : default_jobs(),
                                             static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(plan, tasks[i], times, t_axis, result.rows);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  const SteadyOptions so = steady_options(plan);
  const EvolveOptions eo;
  std::size_t failed = 0;
  for (const SweepRow& r : result.rows) failed += r.ok() ? 0 : 1;
  result.metadata = {{"code_version", PURCELL_VERSION},
                     {"seed", plan.seed},
                     {"tolerances",
                      {{"steady_relative_residual", 1e-9},
                       {"degeneracy_condition", so.degeneracy_condition},
                       {"evolve_rtol", eo.rtol},
                       {"evolve_atol", eo.atol},
                       {"gate_ratio", kMuchGreater}}},
                     {"rows", result.rows.size()},
                     {"failed_rows", failed}};
  return result;
}

SweepRow evaluate_point(const SystemSpec& spec, SolverKind solver, const std::vector<std::string>& metrics,
                        DriveRule rule, std::uint64_t seed) {
  for (const std::string& m : metrics) {
    if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end()) {
      throw PlanError("unknown metric '" + m + "'");
    }
  }
  SweepPlan p;
  p.name = "point";
  p.base = spec;
  p.metrics = metrics;
  p.solver = solver;
  p.drive_rule = rule;
  p.seed = seed;
  std::vector<SweepRow> rows(1);
  run_task(p, Task{}, {}, -1, rows);
  return rows.front();
}

std::vector<std::string> applicable_metrics(const SystemSpec& spec, SolverKind solver) {
  std::vector<std::string> m;
  if (spec.n_emitters == 2) {
    m = {"concurrence", "fidelity_S", "fidelity_A"};
  }
  m.push_back("fidelity_W");
  if (solver != SolverKind::effective) {
    m.insert(m.end(), {"fidelity_W_heralded", "n_cav", "g2_0"});
  }
  if (spec.n_emitters == 2 && spec.P > 0.0 && spec.J != 0.0 && spec.kappa > 0.0) {
    m.insert(m.end(), {"analytic_rho_S", "analytic_tau_S"});
    if (spec.J > 0.0 && spec.g != 0.0) m.push_back("analytic_P_opt");
  }
  return m;
}

// ---------------------------------------------------------------- output

namespace {

std::vector<std::string> header(const SweepPlan& plan) {
  std::vector<std::string> h;
  if (!plan.variants.empty()) h.push_back("variant");
  for (const SweepAxis& a : plan.axes) h.push_back(a.name);
  for (const std::string& m : plan.metrics) h.push_back(m);
  for (const char* g : {"gate_J_kappa", "gate_kappa_GammaP", "gate_GammaP_gamma", "gate_GammaP_P"}) h.push_back(g);
  h.push_back("status");
  return h;
}

}  // namespace

std::string emit_csv(const SweepResult& result) {
  std::string out;
  const std::vector<std::string> h = header(result.plan);
  for (std::size_t i = 0; i < h.size(); ++i) out += (i ? "," : "") + h[i];
  out += '\n';
  for (const SweepRow& r : result.rows) {
    std::string line;
    if (!result.plan.variants.empty()) line += r.variant + ",";
    for (double v : r.axis_values) line += format_number(v) + ",";
    for (double v : r.metrics) line += format_number(v) + ",";
    for (bool g : {r.gates.J_kappa, r.gates.kappa_GammaP, r.gates.GammaP_gamma, r.gates.GammaP_P}) {
      line += g ? "1," : "0,";
    }
    line += r.status;
    out += line + '\n';
  }
  return out;
}

nlohmann::json emit_json(const SweepResult& result) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["plan"] = plan_to_json(result.plan);
  j["metadata"] = result.metadata;
  j["columns"] = header(result.plan);
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : result.rows) {
    nlohmann::json jr;
    jr["variant"] = r.variant;
    jr["axes"] = nlohmann::json::array();
    for (double v : r.axis_values) jr["axes"].push_back(number_or_null(v));
    jr["metrics"] = nlohmann::json::array();
    for (double v : r.metrics) jr["metrics"].push_back(number_or_null(v));
    jr["gates"] = {{"J_kappa", r.gates.J_kappa},
                   {"kappa_GammaP", r.gates.kappa_GammaP},
                   {"GammaP_gamma", r.gates.GammaP_gamma},
                   {"GammaP_P", r.gates.GammaP_P}};
    jr["status"] = r.status;
    jr["message"] = r.message;
    j["rows"].push_back(jr);
  }
  return j;
}

SweepResult result_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) throw PlanError("unsupported result schema version");
    SweepResult r;
    r.plan = plan_from_json(j.at("plan"));
    r.metadata = j.at("metadata");
    for (const auto& jr : j.at("rows")) {
      SweepRow row;
      row.variant = jr.at("variant").get<std::string>();
      for (const auto& v : jr.at("axes")) row.axis_values.push_back(number_from_json(v));
      for (const auto& v : jr.at("metrics")) row.metrics.push_back(number_from_json(v));
      const auto& g = jr.at("gates");
      row.gates = {g.at("J_kappa").get<bool>(), g.at("kappa_GammaP").get<bool>(),
                   g.at("GammaP_gamma").get<bool>(), g.at("GammaP_P").get<bool>()};
      row.status = jr.at("status").get<std::string>();
      row.message = jr.at("message").get<std::string>();
      r.rows.push_back(std::move(row));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw PlanError(std::string("malformed sweep result: ") + e.what());
  }
}

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw PlanError("unknown output format '" + s + "'");
}

std::string emit(const SweepResult& result, OutputFormat format) {
  return format == OutputFormat::csv ? emit_csv(result) : emit_json(result).dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + ": " + std::strerror(errno));
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("cannot write " + path + ": " + std::strerror(errno));
}

}  // namespace purcell
