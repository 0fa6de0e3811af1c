// qite: command-line front end for the dbqite library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dbqite/dbqite.hpp"
#include "json.hpp"

using namespace dbqite;
using nlohmann::json;

namespace {

std::string fmt(Real v) { return detail::fmt_real(v); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class F>
void write_with(const std::string& path, F&& fill) {
  std::ostringstream s;
  fill(s);
  write_atomic(path, s.str());
}

Circuit load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_circuit(in);
}

/// Accepts either a bare JSON array of step durations or an object with a "schedule" array.
std::vector<Real> load_schedule(const std::string& path) {
  const json j = json::parse(read_file(path));
  const json& arr = j.is_array() ? j : j.at("schedule");
  return arr.get<std::vector<Real>>();
}

std::string fidelity_header(const std::vector<int>& tracked) {
  std::string s;
  for (int t : tracked) s += ",F" + std::to_string(t);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double-bracket quantum imaginary-time evolution toolkit"};
  app.require_subcommand(1);

  // models ------------------------------------------------------------------
  auto* models = app.add_subcommand("models", "Build Hamiltonians and initial states");
  models->require_subcommand(1);

  HeisenbergParams hp;
  std::string boundary = "open", out;
  auto* heis = models->add_subcommand("heisenberg", "Heisenberg XXX chain with uniform Z field");
  heis->add_option("--L", hp.L, "number of sites")->capture_default_str();
  heis->add_option("--J", hp.J, "exchange coupling")->capture_default_str();
  heis->add_option("--B", hp.B, "field strength")->capture_default_str();
  heis->add_option("--boundary", boundary, "open|periodic")->capture_default_str();
  heis->add_option("--out", out, "output Pauli-sum file")->required();
  heis->callback([&] {
    hp.boundary = parse_boundary(boundary);
    write_with(out, [&](std::ostream& o) { write_pauli_sum(o, build_heisenberg(hp)); });
  });

  int singlet_L = 10;
  std::string circuit_out;
  auto* singlet = models->add_subcommand("singlet", "Product of nearest-neighbour singlets");
  singlet->add_option("--L", singlet_L, "number of sites (even)")->capture_default_str();
  singlet->add_option("--out", out, "output statevector file")->required();
  singlet->add_option("--circuit-out", circuit_out, "also write the preparation circuit");
  singlet->callback([&] {
    write_with(out, [&](std::ostream& o) { write_state(o, singlet_state(singlet_L)); });
    if (!circuit_out.empty()) {
      write_with(circuit_out, [&](std::ostream& o) { write_circuit(o, singlet_preparation(singlet_L)); });
    }
  });

  SaddleInitSpec saddle_spec;
  std::string hamiltonian;
  auto* saddle = models->add_subcommand("saddle", "State biased through an intermediate eigenstate");
  saddle->add_option("--k", saddle_spec.k, "intermediate eigenindex")->capture_default_str();
  saddle->add_option("--f0", saddle_spec.ground_weight, "ground-state weight")->capture_default_str();
  saddle->add_option("--high-index", saddle_spec.high_index, "dominant eigenindex")->capture_default_str();
  saddle->add_option("--hamiltonian", hamiltonian, "Pauli-sum file")->required();
  saddle->add_option("--out", out, "output statevector file")->required();
  saddle->callback([&] {
    const auto psi = saddle_state(load_pauli_sum(hamiltonian), saddle_spec);
    write_with(out, [&](std::ostream& o) { write_state(o, psi); });
  });

  // ite ---------------------------------------------------------------------
  auto* ite = app.add_subcommand("ite", "Exact imaginary-time evolution");
  ite->require_subcommand(1);
  std::string state;
  Real tau_max = 20.0;
  int points = 400;
  std::vector<int> tracked{0, 1};
  auto* ite_run = ite->add_subcommand("run", "Trajectory on a linear tau grid");
  ite_run->add_option("--hamiltonian", hamiltonian, "Pauli-sum file")->required();
  ite_run->add_option("--state", state, "initial statevector file")->required();
  ite_run->add_option("--tau-max", tau_max, "final imaginary time")->capture_default_str();
  ite_run->add_option("--points", points, "grid points including tau=0")->capture_default_str();
  ite_run->add_option("--track", tracked, "eigenindices whose fidelity is recorded")->capture_default_str();
  ite_run->add_option("--out", out, "output CSV")->required();
  ite_run->callback([&] {
    const PauliSum h = load_pauli_sum(hamiltonian);
    const ImaginaryTimeEvolver ev(h);
    const auto traj = ite_trajectory(ev, h, load_state(state), linear_grid(0.0, tau_max, points), tracked);
    write_with(out, [&](std::ostream& o) {
      o << "tau,E,V" << fidelity_header(tracked) << '\n';
      for (std::size_t i = 0; i < traj.taus.size(); ++i) {
        o << fmt(traj.taus[i]) << ',' << fmt(traj.energies[i]) << ',' << fmt(traj.variances[i]);
        for (Real f : traj.fidelities[i]) o << ',' << fmt(f);
        o << '\n';
      }
    });
  });

  // dbqite ------------------------------------------------------------------
  auto* db = app.add_subcommand("dbqite", "State-level DB-QITE");
  db->require_subcommand(1);
  StepConfig step;
  std::string formula = "gc", spacing = "linear", slot = "hamiltonian", schedule_out;
  int steps = 5;
  auto* db_run = db->add_subcommand("run", "Grid-searched DB-QITE trajectory");
  db_run->add_option("--hamiltonian", hamiltonian, "Pauli-sum file")->required();
  db_run->add_option("--state", state, "initial statevector file")->required();
  db_run->add_option("--steps", steps, "number of recursion steps K")->capture_default_str();
  db_run->add_option("--formula", formula, "gc|hopf")->capture_default_str();
  db_run->add_option("--alpha", step.alpha, "rescaling of H")->capture_default_str();
  db_run->add_option("--beta", step.beta, "rescaling of the state projector")->capture_default_str();
  db_run->add_option("--alpha-slot", slot, "hamiltonian|state")->capture_default_str();
  db_run->add_option("--grid-points", step.grid_points, "candidate durations per step")->capture_default_str();
  db_run->add_option("--grid-max", step.grid_max, "largest candidate duration")->capture_default_str();
  db_run->add_option("--grid-spacing", spacing, "linear|geometric")->capture_default_str();
  db_run->add_option("--grid-min-ratio", step.grid_min_ratio, "smallest/largest ratio of a geometric grid")
      ->capture_default_str();
  db_run->add_option("--track", tracked, "eigenindices whose fidelity is recorded")->capture_default_str();
  db_run->add_option("--out", out, "output CSV")->required();
  db_run->add_option("--schedule-out", schedule_out, "write the chosen schedule as JSON");
  db_run->callback([&] {
    step.formula = parse_formula(formula);
    step.grid_spacing = parse_grid_spacing(spacing);
    step.alpha_slot = parse_alpha_slot(slot);
    const PauliSum h = load_pauli_sum(hamiltonian);
    const Propagator prop(h);
    const auto traj = run_dbqite(load_state(state), h, prop, steps, step, tracked);
    write_with(out, [&](std::ostream& o) {
      o << "k,s_k,duration,E,V" << fidelity_header(tracked) << ",improved\n";
      for (const auto& r : traj.rows) {
        o << r.k << ',' << (r.s ? fmt(*r.s) : "") << ',' << fmt(r.duration) << ',' << fmt(r.energy) << ','
          << fmt(r.variance);
        for (Real f : r.fidelities) o << ',' << fmt(f);
        o << ',' << (r.improved ? (*r.improved ? "1" : "0") : "") << '\n';
      }
    });
    if (!schedule_out.empty()) {
      const json j{{"formula", formula},         {"alpha", step.alpha}, {"beta", step.beta},
                   {"alpha_slot", slot},         {"schedule", traj.schedule()}};
      write_atomic(schedule_out, j.dump(2) + "\n");
    }
  });

  // compile -----------------------------------------------------------------
  auto* comp = app.add_subcommand("compile", "Gate-level synthesis and metrics");
  comp->require_subcommand(1);
  SynthesisConfig sc;
  std::string u0_path, schedule_path, mode = "trotter", and_style = "logical_and";
  int k = 1;
  auto* comp_db = comp->add_subcommand("dbqite", "Recursive DB-QITE circuit U_k");
  comp_db->add_option("--hamiltonian", hamiltonian, "Pauli-sum file")->required();
  comp_db->add_option("--u0", u0_path, "preparation circuit U_0")->required();
  comp_db->add_option("--schedule", schedule_path, "JSON schedule (array or {\"schedule\": [...]})")->required();
  comp_db->add_option("--k", k, "recursion depth")->capture_default_str();
  comp_db->add_option("--formula", formula, "gc|hopf")->capture_default_str();
  comp_db->add_option("--mode", mode, "trotter|exact")->capture_default_str();
  comp_db->add_option("--trotter-steps", sc.trotter_steps, "product-formula steps per exponential")
      ->capture_default_str();
  comp_db->add_option("--trotter-order", sc.trotter_order, "1 or 2")->capture_default_str();
  comp_db->add_option("--alpha", sc.alpha, "rescaling of H")->capture_default_str();
  comp_db->add_option("--beta", sc.beta, "rescaling of the state projector")->capture_default_str();
  comp_db->add_option("--alpha-slot", slot, "hamiltonian|state")->capture_default_str();
  comp_db->add_option("--and-style", and_style, "logical_and|toffoli")->capture_default_str();
  comp_db->add_option("--out", out, "output circuit file")->required();
  comp_db->callback([&] {
    sc.formula = parse_formula(formula);
    sc.mode = parse_evolution_mode(mode);
    sc.alpha_slot = parse_alpha_slot(slot);
    if (and_style != "logical_and" && and_style != "toffoli") throw CLI::ValidationError("--and-style", and_style);
    sc.and_style = and_style == "toffoli" ? AndStyle::toffoli : AndStyle::logical_and;
    const auto c = synthesize(load_circuit(u0_path), load_pauli_sum(hamiltonian), load_schedule(schedule_path), k, sc);
    write_with(out, [&](std::ostream& o) { write_circuit(o, *c); });
  });

  std::string circuit_path, ccx_mode = "toffoli";
  auto* counts = comp->add_subcommand("counts", "Gate counts and depth as JSON");
  counts->add_option("--circuit", circuit_path, "circuit file")->required();
  counts->add_option("--ccx-count", ccx_mode, "toffoli|logical_and")->capture_default_str();
  counts->callback([&] {
    if (ccx_mode != "logical_and" && ccx_mode != "toffoli") throw CLI::ValidationError("--ccx-count", ccx_mode);
    const auto m =
        metrics(load_circuit(circuit_path), {ccx_mode == "toffoli" ? CcxCountMode::toffoli : CcxCountMode::logical_and});
    std::cout << json(m).dump(2) << '\n';
  });

  // simulate ----------------------------------------------------------------
  std::string sidecar;
  auto* sim = app.add_subcommand("simulate", "Statevector simulation with ancillas in |0>");
  sim->add_option("--circuit", circuit_path, "circuit file")->required();
  sim->add_option("--state", state, "input statevector on the data qubits")->required();
  sim->add_option("--out", out, "output statevector file")->required();
  sim->add_option("--sidecar", sidecar, "JSON sidecar path (default: <out>.json)");
  sim->callback([&] {
    const auto res = run_circuit(load_circuit(circuit_path), load_state(state));
    write_with(out, [&](std::ostream& o) { write_state(o, res.final_state); });
    const json j{{"ancilla_residual", res.ancilla_residual}};
    write_atomic(sidecar.empty() ? out + ".json" : sidecar, j.dump(2) + "\n");
  });

  // experiment --------------------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "Declarative experiment runs");
  exp->require_subcommand(1);
  std::string config_path;
  for (const char* name : {"convergence", "saddle"}) {
    auto* sub = exp->add_subcommand(name, std::string(name) == "convergence"
                                              ? "DB-QITE convergence with gate counts"
                                              : "ITE and DB-QITE from saddle-biased states");
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->callback([&, sub] {
      const bool is_saddle = sub->get_name() == "saddle";
      const auto cfg = parse_experiment_config(json::parse(read_file(config_path)), is_saddle);
      const auto files = write_experiment(cfg, run_experiment(cfg), sub->get_name());
      std::cout << files.csv.string() << '\n' << files.meta.string() << '\n' << files.summary.string() << '\n';
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qite: %s\n", e.what());
    return 1;
  }
  return 0;
}
