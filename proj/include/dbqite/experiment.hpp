#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dbqite/compiler.hpp"
#include "dbqite/engine.hpp"
#include "dbqite/ite.hpp"
#include "dbqite/metrics.hpp"
#include "dbqite/models.hpp"
#include "dbqite/simulator.hpp"
#include "json.hpp"

namespace dbqite {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

struct InitialStateSpec {
  enum class Kind { singlet, saddle, file } kind = Kind::singlet;
  SaddleInitSpec saddle;
  std::string path;        // file states
  std::string u0_circuit;  // optional preparation circuit for file states (enables gate metrics)

  std::string label() const {
    switch (kind) {
      case Kind::singlet: return "singlet";
      case Kind::saddle: return "saddle" + std::to_string(saddle.k);
      case Kind::file: return "file:" + std::filesystem::path(path).filename().string();
    }
    return "?";
  }
};

struct MethodSpec {
  enum class Kind { ite, dbqite } kind = Kind::dbqite;
  StepConfig step;

  std::string label() const { return kind == Kind::ite ? "ite" : "dbqite-" + std::string(to_string(step.formula)); }
};

struct CircuitMetricsSpec {
  bool enabled = true;
  EvolutionMode mode = EvolutionMode::trotter;
  int trotter_steps = 2;
  int trotter_order = 2;
  AndStyle and_style = AndStyle::logical_and;
  CcxCountMode ccx_count = CcxCountMode::toffoli;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string output_dir = ".";
  HeisenbergParams model;
  std::vector<InitialStateSpec> initial_states;
  std::vector<MethodSpec> methods;
  int steps = 5;
  Real tau_max = 20.0;
  int tau_points = 400;
  std::vector<int> tracked;
  CircuitMetricsSpec circuit;
  bool error_orders = false;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ParseError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config: key '") + key + "' has the wrong type");
  }
}

inline StepConfig parse_step(const json& j, const std::string& where) {
  check_keys(j, {"kind", "formula", "alpha", "beta", "grid_points", "grid_max", "grid_spacing", "grid_min_ratio",
                 "alpha_slot"},
             where);
  StepConfig s;
  s.formula = parse_formula(get_or<std::string>(j, "formula", "gc"));
  s.alpha = get_or(j, "alpha", s.alpha);
  s.beta = get_or(j, "beta", s.beta);
  s.grid_points = get_or(j, "grid_points", s.grid_points);
  s.grid_max = get_or(j, "grid_max", s.grid_max);
  s.grid_spacing = parse_grid_spacing(get_or<std::string>(j, "grid_spacing", "linear"));
  s.grid_min_ratio = get_or(j, "grid_min_ratio", s.grid_min_ratio);
  s.alpha_slot = parse_alpha_slot(get_or<std::string>(j, "alpha_slot", "hamiltonian"));
  s.validate();
  return s;
}

}  // namespace detail

/// Parses and validates a config document; `saddle_defaults` selects the defaults of the
/// saddle-point experiment (three biased initial states, ITE plus GC DB-QITE).
inline ExperimentConfig parse_experiment_config(const json& j, bool saddle_defaults) {
  using detail::get_or;
  detail::check_keys(j, {"name", "output_dir", "model", "initial_states", "initial_state", "methods", "steps",
                         "tau_max", "tau_points", "tracked", "circuit", "report", "seed"},
                     "config");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", saddle_defaults ? "saddle" : "convergence");
  c.output_dir = get_or<std::string>(j, "output_dir", ".");
  if (j.contains("model")) {
    const auto& m = j.at("model");
    detail::check_keys(m, {"L", "J", "B", "boundary"}, "model");
    c.model.L = get_or(m, "L", c.model.L);
    c.model.J = get_or(m, "J", c.model.J);
    c.model.B = get_or(m, "B", c.model.B);
    c.model.boundary = parse_boundary(get_or<std::string>(m, "boundary", "open"));
  }
  if (c.model.L < 2) throw ParseError("model: L must be >= 2");
  if (c.model.L > kMaxDenseQubits) throw ParseError("model: L exceeds the dense cap of 14");

  json states = json::array();
  if (j.contains("initial_state")) states.push_back(j.at("initial_state"));
  if (j.contains("initial_states")) {
    if (!j.at("initial_states").is_array()) throw ParseError("initial_states: expected an array");
    for (const auto& s : j.at("initial_states")) states.push_back(s);
  }
  for (const auto& s : states) {
    detail::check_keys(s, {"type", "k", "f0", "high_index", "path", "u0_circuit"}, "initial_state");
    InitialStateSpec spec;
    const auto type = get_or<std::string>(s, "type", "singlet");
    if (type == "singlet") {
      spec.kind = InitialStateSpec::Kind::singlet;
    } else if (type == "saddle") {
      spec.kind = InitialStateSpec::Kind::saddle;
      spec.saddle.k = get_or(s, "k", spec.saddle.k);
      spec.saddle.ground_weight = get_or(s, "f0", spec.saddle.ground_weight);
      spec.saddle.high_index = get_or(s, "high_index", spec.saddle.high_index);
      if (spec.saddle.k <= 0 || spec.saddle.k >= spec.saddle.high_index) throw ParseError("saddle: need 0 < k < high_index");
      if (spec.saddle.high_index >= static_cast<int>(dim_of(c.model.L))) throw ParseError("saddle: high_index out of range");
      if (!(spec.saddle.ground_weight >= 0)) throw ParseError("saddle: f0 must be >= 0");
    } else if (type == "file") {
      spec.kind = InitialStateSpec::Kind::file;
      spec.path = get_or<std::string>(s, "path", "");
      spec.u0_circuit = get_or<std::string>(s, "u0_circuit", "");
      if (spec.path.empty() || !std::filesystem::exists(spec.path)) {
        throw ParseError("initial_state: file '" + spec.path + "' does not exist");
      }
      if (!spec.u0_circuit.empty() && !std::filesystem::exists(spec.u0_circuit)) {
        throw ParseError("initial_state: u0_circuit '" + spec.u0_circuit + "' does not exist");
      }
    } else {
      throw ParseError("initial_state: unknown type '" + type + "'");
    }
    c.initial_states.push_back(spec);
  }
  if (c.initial_states.empty()) {
    if (saddle_defaults) {
      for (int k : {1, 2, 4}) {
        InitialStateSpec spec;
        spec.kind = InitialStateSpec::Kind::saddle;
        spec.saddle.k = k;
        c.initial_states.push_back(spec);
      }
    } else {
      c.initial_states.push_back(InitialStateSpec{});
    }
  }
  for (const auto& s : c.initial_states) {
    if (s.kind == InitialStateSpec::Kind::singlet && c.model.L % 2) throw ParseError("initial_state: singlet needs even L");
  }

  if (j.contains("methods")) {
    if (!j.at("methods").is_array()) throw ParseError("methods: expected an array");
    for (const auto& m : j.at("methods")) {
      MethodSpec spec;
      const auto kind = get_or<std::string>(m, "kind", "dbqite");
      if (kind == "ite") {
        detail::check_keys(m, {"kind"}, "method");
        spec.kind = MethodSpec::Kind::ite;
      } else if (kind == "dbqite") {
        spec.kind = MethodSpec::Kind::dbqite;
        spec.step = detail::parse_step(m, "method");
      } else {
        throw ParseError("method: unknown kind '" + kind + "'");
      }
      c.methods.push_back(spec);
    }
  }
  if (c.methods.empty()) {
    if (saddle_defaults) {
      c.methods.push_back(MethodSpec{MethodSpec::Kind::ite, {}});
      c.methods.push_back(MethodSpec{MethodSpec::Kind::dbqite, StepConfig{}});
    } else {
      StepConfig hopf;
      hopf.formula = Formula::hopf;
      c.methods.push_back(MethodSpec{MethodSpec::Kind::dbqite, StepConfig{}});
      c.methods.push_back(MethodSpec{MethodSpec::Kind::dbqite, hopf});
    }
  }

  c.steps = get_or(j, "steps", c.steps);
  c.tau_max = get_or(j, "tau_max", c.tau_max);
  c.tau_points = get_or(j, "tau_points", c.tau_points);
  if (c.steps < 0) throw ParseError("steps must be >= 0");
  if (!(c.tau_max > 0) || c.tau_points < 2) throw ParseError("tau grid: need tau_max > 0 and tau_points >= 2");

  if (j.contains("tracked")) {
    c.tracked = j.at("tracked").get<std::vector<int>>();
  } else {
    std::set<int> t{0, 1};
    for (const auto& s : c.initial_states)
      if (s.kind == InitialStateSpec::Kind::saddle) t.insert(s.saddle.k);
    c.tracked.assign(t.begin(), t.end());
  }
  for (int t : c.tracked) {
    if (t < 0 || t >= static_cast<int>(dim_of(c.model.L))) throw ParseError("tracked: eigenindex out of range");
  }

  if (j.contains("circuit")) {
    const auto& cj = j.at("circuit");
    detail::check_keys(cj, {"enabled", "mode", "trotter_steps", "trotter_order", "and_style", "ccx_count"}, "circuit");
    c.circuit.enabled = get_or(cj, "enabled", c.circuit.enabled);
    c.circuit.mode = parse_evolution_mode(get_or<std::string>(cj, "mode", "trotter"));
    c.circuit.trotter_steps = get_or(cj, "trotter_steps", c.circuit.trotter_steps);
    c.circuit.trotter_order = get_or(cj, "trotter_order", c.circuit.trotter_order);
    const auto style = get_or<std::string>(cj, "and_style", "logical_and");
    if (style != "logical_and" && style != "toffoli") throw ParseError("circuit: and_style must be logical_and|toffoli");
    c.circuit.and_style = style == "toffoli" ? AndStyle::toffoli : AndStyle::logical_and;
    const auto ccx = get_or<std::string>(cj, "ccx_count", "toffoli");
    if (ccx != "logical_and" && ccx != "toffoli") throw ParseError("circuit: ccx_count must be logical_and|toffoli");
    c.circuit.ccx_count = ccx == "toffoli" ? CcxCountMode::toffoli : CcxCountMode::logical_and;
  } else if (saddle_defaults) {
    c.circuit.enabled = false;
  }
  if (j.contains("report")) {
    detail::check_keys(j.at("report"), {"error_orders"}, "report");
    c.error_orders = get_or(j.at("report"), "error_orders", false);
  }
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json states = json::array();
  for (const auto& s : c.initial_states) {
    json o;
    switch (s.kind) {
      case InitialStateSpec::Kind::singlet: o = {{"type", "singlet"}}; break;
      case InitialStateSpec::Kind::saddle:
        o = {{"type", "saddle"}, {"k", s.saddle.k}, {"f0", s.saddle.ground_weight}, {"high_index", s.saddle.high_index}};
        break;
      case InitialStateSpec::Kind::file: o = {{"type", "file"}, {"path", s.path}, {"u0_circuit", s.u0_circuit}}; break;
    }
    states.push_back(o);
  }
  json methods = json::array();
  for (const auto& m : c.methods) {
    if (m.kind == MethodSpec::Kind::ite) {
      methods.push_back({{"kind", "ite"}});
    } else {
      methods.push_back({{"kind", "dbqite"},
                         {"formula", to_string(m.step.formula)},
                         {"alpha", m.step.alpha},
                         {"beta", m.step.beta},
                         {"grid_points", m.step.grid_points},
                         {"grid_max", m.step.grid_max},
                         {"grid_spacing", to_string(m.step.grid_spacing)},
                         {"grid_min_ratio", m.step.grid_min_ratio},
                         {"alpha_slot", to_string(m.step.alpha_slot)}});
    }
  }
  return json{{"name", c.name},
              {"output_dir", c.output_dir},
              {"model", {{"L", c.model.L}, {"J", c.model.J}, {"B", c.model.B}, {"boundary", to_string(c.model.boundary)}}},
              {"initial_states", states},
              {"methods", methods},
              {"steps", c.steps},
              {"tau_max", c.tau_max},
              {"tau_points", c.tau_points},
              {"tracked", c.tracked},
              {"circuit",
               {{"enabled", c.circuit.enabled},
                {"mode", to_string(c.circuit.mode)},
                {"trotter_steps", c.circuit.trotter_steps},
                {"trotter_order", c.circuit.trotter_order},
                {"and_style", c.circuit.and_style == AndStyle::toffoli ? "toffoli" : "logical_and"},
                {"ccx_count", c.circuit.ccx_count == CcxCountMode::toffoli ? "toffoli" : "logical_and"}}},
              {"report", {{"error_orders", c.error_orders}}},
              {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Results

struct TrajectoryRow {
  int step = 0;
  Real tau = 0;  // ITE duration, or cumulative sum of s_k for DB-QITE
  std::optional<Real> s;
  Real energy = 0;
  Real variance = 0;
  std::vector<Real> fidelities;
  std::optional<bool> improved;
  std::optional<GateMetrics> gates;
};

struct RunRecord {
  std::string init;
  std::string method;
  std::vector<int> tracked;
  std::vector<TrajectoryRow> rows;
  std::optional<json> error_orders;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  json spectrum;  // lambda_min, lambda_max, tracked eigenvalues
};

namespace detail {

inline std::string fmt_real(Real v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  const std::size_t n = x.size();
  Real mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<Real>(n);
  my /= static_cast<Real>(n);
  Real sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline StateVector make_initial(const InitialStateSpec& s, const ExperimentConfig& cfg, const EigenSystem& es) {
  switch (s.kind) {
    case InitialStateSpec::Kind::singlet: return singlet_state(cfg.model.L);
    case InitialStateSpec::Kind::saddle: return saddle_state(es, s.saddle);
    case InitialStateSpec::Kind::file: {
      auto psi = load_state(s.path);
      if (psi.num_qubits() != cfg.model.L) throw std::invalid_argument("initial state file has the wrong qubit count");
      return psi;
    }
  }
  throw std::logic_error("unreachable");
}

inline std::optional<Circuit> make_u0(const InitialStateSpec& s, const ExperimentConfig& cfg) {
  if (s.kind == InitialStateSpec::Kind::singlet) return singlet_preparation(cfg.model.L);
  if (s.kind == InitialStateSpec::Kind::file && !s.u0_circuit.empty()) {
    std::ifstream in(s.u0_circuit);
    if (!in) throw std::runtime_error("cannot open '" + s.u0_circuit + "'");
    return read_circuit(in);
  }
  return std::nullopt;
}

}  // namespace detail

/// Phase-aligned step error against the exact bracket flow, and Trotter state error,
/// as log-log slopes over small durations.
inline json error_order_report(const StateVector& omega, const PauliSum& h, const Propagator& prop,
                               const CircuitMetricsSpec& circ) {
  std::vector<Real> ss, gc_err, hopf_err;
  for (Real s : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
    const auto target = bracket_flow_target(omega, h, s);
    ss.push_back(s);
    gc_err.push_back(phase_aligned_distance(gc_step(omega, prop, s), target));
    hopf_err.push_back(phase_aligned_distance(hopf_step(omega, prop, s), target));
  }
  json out{{"gc_slope", detail::loglog_slope(ss, gc_err)}, {"hopf_slope", detail::loglog_slope(ss, hopf_err)}};
  if (h.max_weight() <= 2 && h.num_qubits() <= kMaxSimQubits) {
    std::vector<Real> th, tr_err;
    for (Real t : {0.02, 0.05, 0.1, 0.2}) {
      const Circuit c = compile_trotter(h, t, 1, circ.trotter_order);
      const auto sim = run_circuit(c, omega);
      th.push_back(t);
      tr_err.push_back((sim.final_state.amplitudes() - prop.exp_i(t, omega.amplitudes())).norm());
    }
    out["trotter_slope"] = detail::loglog_slope(th, tr_err);
  }
  return out;
}

/// Growth ratio of a positive sequence indexed by k, from a least-squares fit of log(count)
/// against k over k >= k_min.
inline Real fit_growth_ratio(const std::vector<Real>& counts, std::size_t k_min) {
  std::vector<Real> ks, ls;
  for (std::size_t k = k_min; k < counts.size(); ++k) {
    if (!(counts[k] > 0)) continue;
    ks.push_back(static_cast<Real>(k));
    ls.push_back(std::log(counts[k]));
  }
  if (ks.size() < 2) return std::nan("");
  Real mk = 0, ml = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += ls[i];
  }
  mk /= static_cast<Real>(ks.size());
  ml /= static_cast<Real>(ks.size());
  Real sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (ls[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  return std::exp(sxy / sxx);
}

/// Runs every (initial state, method) pair of the config. DB-QITE runs also get gate
/// metrics of U_k for each k when a preparation circuit exists and metrics are enabled.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const PauliSum h = build_heisenberg(cfg.model);
  auto prop = std::make_shared<const Propagator>(h);
  const ImaginaryTimeEvolver ite(prop);
  const auto& es = prop->spectrum();
  ExperimentResult res;
  json tracked_vals = json::object();
  for (int t : cfg.tracked) tracked_vals[std::to_string(t)] = es.values[t];
  res.spectrum = {{"lambda_min", prop->min_eigenvalue()}, {"lambda_max", prop->max_eigenvalue()}, {"tracked", tracked_vals}};

  for (const auto& init : cfg.initial_states) {
    const StateVector psi0 = detail::make_initial(init, cfg, es);
    const auto u0 = cfg.circuit.enabled ? detail::make_u0(init, cfg) : std::nullopt;
    for (const auto& method : cfg.methods) {
      RunRecord run;
      run.init = init.label();
      run.method = method.label();
      run.tracked = cfg.tracked;
      if (method.kind == MethodSpec::Kind::ite) {
        const auto taus = linear_grid(0.0, cfg.tau_max, cfg.tau_points);
        const auto traj = ite_trajectory(ite, h, psi0, taus, cfg.tracked);
        for (std::size_t i = 0; i < taus.size(); ++i) {
          TrajectoryRow row;
          row.step = static_cast<int>(i);
          row.tau = taus[i];
          row.energy = traj.energies[i];
          row.variance = traj.variances[i];
          row.fidelities = traj.fidelities[i];
          run.rows.push_back(std::move(row));
        }
      } else {
        const auto traj = run_dbqite(psi0, h, *prop, cfg.steps, method.step, cfg.tracked);
        const auto schedule = traj.schedule();
        SynthesisConfig sc;
        sc.formula = method.step.formula;
        sc.mode = cfg.circuit.mode;
        sc.trotter_steps = cfg.circuit.trotter_steps;
        sc.trotter_order = cfg.circuit.trotter_order;
        sc.alpha = method.step.alpha;
        sc.beta = method.step.beta;
        sc.alpha_slot = method.step.alpha_slot;
        sc.and_style = cfg.circuit.and_style;
        for (const auto& r : traj.rows) {
          TrajectoryRow row;
          row.step = r.k;
          row.tau = r.duration;
          row.s = r.s;
          row.energy = r.energy;
          row.variance = r.variance;
          row.fidelities = r.fidelities;
          row.improved = r.improved;
          if (u0) {
            const auto circ = synthesize(*u0, h, schedule, r.k, sc);
            row.gates = metrics(*circ, MetricsOptions{cfg.circuit.ccx_count});
          }
          run.rows.push_back(std::move(row));
        }
        if (cfg.error_orders) run.error_orders = error_order_report(psi0, h, *prop, cfg.circuit);
      }
      res.runs.push_back(std::move(run));
    }
  }
  return res;
}

/// Machine-readable summary of completed runs. An empty run list gives an empty object.
inline json emit_report(const std::vector<RunRecord>& runs) {
  json out = json::object();
  if (runs.empty()) return out;
  json list = json::array();
  for (const auto& run : runs) {
    json r;
    r["init"] = run.init;
    r["method"] = run.method;
    if (run.rows.empty()) {
      list.push_back(r);
      continue;
    }
    const auto point = [&](const TrajectoryRow& row) {
      json p{{"tau", row.tau}, {"E", row.energy}, {"V", row.variance}};
      for (std::size_t i = 0; i < run.tracked.size(); ++i) p["F" + std::to_string(run.tracked[i])] = row.fidelities[i];
      return p;
    };
    r["initial"] = point(run.rows.front());
    r["final"] = point(run.rows.back());
    bool e_monotone = true, f0_monotone = true;
    const auto f0_col = std::find(run.tracked.begin(), run.tracked.end(), 0);
    json gains = json::array();
    for (std::size_t i = 1; i < run.rows.size(); ++i) {
      const auto& a = run.rows[i - 1];
      const auto& b = run.rows[i];
      gains.push_back(a.energy - b.energy);
      if (!(b.energy < a.energy)) e_monotone = false;
      if (f0_col != run.tracked.end()) {
        const auto c = static_cast<std::size_t>(f0_col - run.tracked.begin());
        if (!(b.fidelities[c] > a.fidelities[c])) f0_monotone = false;
      }
    }
    r["energy_gains"] = gains;
    r["energy_strictly_decreasing"] = e_monotone;
    if (f0_col != run.tracked.end()) r["F0_strictly_increasing"] = f0_monotone;
    json schedule = json::array();
    for (const auto& row : run.rows)
      if (row.s) schedule.push_back(*row.s);
    if (!schedule.empty()) r["schedule"] = schedule;
    if (run.rows.front().gates) {
      std::vector<Real> queries, cx, u3;
      for (const auto& row : run.rows) {
        queries.push_back(static_cast<Real>(row.gates->u0_queries));
        cx.push_back(static_cast<Real>(row.gates->cx_count));
        u3.push_back(static_cast<Real>(row.gates->u3_count));
      }
      const std::size_t kmin = queries.size() > 3 ? queries.size() - 3 : 1;
      r["count_ratio_fit"] = {{"k_min", kmin},
                              {"u0_queries", fit_growth_ratio(queries, kmin)},
                              {"cx", fit_growth_ratio(cx, kmin)},
                              {"u3", fit_growth_ratio(u3, kmin)}};
    }
    if (run.error_orders) r["error_orders"] = *run.error_orders;
    list.push_back(r);
  }
  out["runs"] = list;
  return out;
}

inline std::string trajectory_csv(const std::vector<RunRecord>& runs, const std::vector<int>& tracked) {
  std::ostringstream out;
  out << "init,method,step,tau,s_k,E,V";
  for (int t : tracked) out << ",F" << t;
  out << ",improved,u3,cx,depth,u0_queries\n";
  for (const auto& run : runs) {
    for (const auto& row : run.rows) {
      out << run.init << ',' << run.method << ',' << row.step << ',' << detail::fmt_real(row.tau) << ','
          << (row.s ? detail::fmt_real(*row.s) : "") << ',' << detail::fmt_real(row.energy) << ','
          << detail::fmt_real(row.variance);
      for (Real f : row.fidelities) out << ',' << detail::fmt_real(f);
      out << ',' << (row.improved ? (*row.improved ? "1" : "0") : "");
      if (row.gates) {
        out << ',' << row.gates->u3_count << ',' << row.gates->cx_count << ',' << row.gates->depth << ','
            << row.gates->u0_queries;
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  }
  return out.str();
}

/// Writes content to a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

struct ExperimentFiles {
  std::filesystem::path csv, meta, summary;
};

inline ExperimentFiles write_experiment(const ExperimentConfig& cfg, const ExperimentResult& res,
                                        const std::string& command) {
  const std::filesystem::path dir(cfg.output_dir);
  ExperimentFiles f{dir / (cfg.name + ".csv"), dir / (cfg.name + ".meta.json"), dir / (cfg.name + ".summary.json")};
  write_atomic(f.csv, trajectory_csv(res.runs, cfg.tracked));
  json meta{{"command", command},
            {"config", to_json(cfg)},
            {"spectrum", res.spectrum},
            {"conventions",
             {{"bit_order", "qubit 0 (site 1) is the most significant bit"},
              {"depth", "greedy earliest-available-qubit schedule over the expanded gate list"},
              {"u3_count", "every single-qubit gate counts as one U3; no peephole merging"},
              {"step_grid", "linear: s_j = grid_max * j / grid_points, j = 1..grid_points; "
                            "geometric: grid_max * grid_min_ratio^((N-j)/(N-1))"},
              {"rescaling", "theta_H = sqrt(alpha beta s)/alpha, theta_omega = sqrt(alpha beta s)/beta "
                            "(alpha_slot=hamiltonian); swapped for alpha_slot=state"},
              {"tau_column", "ITE duration, or cumulative sum of s_k for DB-QITE rows"},
              {"reflection_with_measurement_entangling", "3.5n - 4 (reported only)"}}}};
  write_atomic(f.meta, meta.dump(2) + "\n");
  write_atomic(f.summary, emit_report(res.runs).dump(2) + "\n");
  return f;
}

}  // namespace dbqite
