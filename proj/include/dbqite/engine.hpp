#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbqite/dense.hpp"
#include "dbqite/ite.hpp"
#include "dbqite/pauli.hpp"
#include "dbqite/state.hpp"

namespace dbqite {

/// Golden-ratio coefficient of the higher-order product formula.
inline const Real kPhi = (std::sqrt(5.0) - 1.0) / 2.0;

enum class Formula { gc, hopf };
enum class GridSpacing { linear, geometric };
/// Which operator slot the alpha rescaling divides (beta divides the other).
enum class AlphaSlot { hamiltonian, state };

inline std::string_view to_string(Formula f) { return f == Formula::gc ? "gc" : "hopf"; }
inline std::string_view to_string(GridSpacing g) { return g == GridSpacing::linear ? "linear" : "geometric"; }
inline std::string_view to_string(AlphaSlot a) { return a == AlphaSlot::hamiltonian ? "hamiltonian" : "state"; }

inline Formula parse_formula(std::string_view s) {
  if (s == "gc") return Formula::gc;
  if (s == "hopf") return Formula::hopf;
  throw std::invalid_argument("unknown formula '" + std::string(s) + "' (expected gc|hopf)");
}
inline GridSpacing parse_grid_spacing(std::string_view s) {
  if (s == "linear") return GridSpacing::linear;
  if (s == "geometric") return GridSpacing::geometric;
  throw std::invalid_argument("unknown grid spacing '" + std::string(s) + "' (expected linear|geometric)");
}
inline AlphaSlot parse_alpha_slot(std::string_view s) {
  if (s == "hamiltonian") return AlphaSlot::hamiltonian;
  if (s == "state") return AlphaSlot::state;
  throw std::invalid_argument("unknown alpha slot '" + std::string(s) + "' (expected hamiltonian|state)");
}

struct StepConfig {
  Formula formula = Formula::gc;
  Real alpha = 10.0;
  Real beta = 1.0;
  int grid_points = 20;
  Real grid_max = 1.0;
  GridSpacing grid_spacing = GridSpacing::linear;
  /// Smallest geometric grid point as a fraction of grid_max.
  Real grid_min_ratio = 1e-3;
  AlphaSlot alpha_slot = AlphaSlot::hamiltonian;

  void validate() const {
    if (!(alpha > 0) || !(beta > 0)) throw std::invalid_argument("StepConfig: alpha and beta must be > 0");
    if (grid_points < 2) throw std::invalid_argument("StepConfig: grid_points must be >= 2");
    if (!(grid_max > 0)) throw std::invalid_argument("StepConfig: grid_max must be > 0");
    if (!(grid_min_ratio > 0 && grid_min_ratio < 1)) throw std::invalid_argument("StepConfig: grid_min_ratio must be in (0,1)");
  }
};

/// Rotation angles for one step of duration s after rescaling G_{ab s}(A/a, B/b).
struct StepAngles {
  Real hamiltonian = 0;  // multiplies H
  Real state = 0;        // multiplies |omega><omega|
};

inline StepAngles step_angles(Real s, Real alpha, Real beta, AlphaSlot slot = AlphaSlot::hamiltonian) {
  if (!(s >= 0)) throw std::invalid_argument("step duration s must be >= 0");
  const Real root = std::sqrt(alpha * beta * s);
  return slot == AlphaSlot::hamiltonian ? StepAngles{root / alpha, root / beta} : StepAngles{root / beta, root / alpha};
}

/// e^{i theta |omega><omega|} x = x + (e^{i theta} - 1) omega <omega|x>
inline CVector rank_one_phase(const CVector& omega, Real theta, const CVector& x) {
  return x + (std::polar(1.0, theta) - 1.0) * omega.dot(x) * omega;
}

/// |omega'> = e^{i t_H H} e^{i t_w omega} e^{-i t_H H} |omega>
inline StateVector gc_step(const StateVector& omega, const Propagator& prop, Real s, Real alpha = 1.0,
                           Real beta = 1.0, AlphaSlot slot = AlphaSlot::hamiltonian) {
  const auto th = step_angles(s, alpha, beta, slot);
  if (s == 0) return omega;
  const CVector& w = omega.amplitudes();
  CVector x = prop.exp_i(-th.hamiltonian, w);
  x = rank_one_phase(w, th.state, x);
  x = prop.exp_i(th.hamiltonian, x);
  return StateVector(omega.num_qubits(), std::move(x));
}

inline StateVector gc_step(const StateVector& omega, const PauliSum& h, Real s, Real alpha = 1.0, Real beta = 1.0) {
  return gc_step(omega, Propagator(h), s, alpha, beta);
}

/// Five non-trivial factors of the golden-ratio product formula acting on |omega>
/// (the trailing e^{i sqrt(s) omega} only contributes a global phase):
/// e^{i phi t_H H} e^{i phi t_w omega} e^{-i t_H H} e^{-i (1+phi) t_w omega} e^{i (1-phi) t_H H}
inline StateVector hopf_step(const StateVector& omega, const Propagator& prop, Real s, Real alpha = 1.0,
                             Real beta = 1.0, AlphaSlot slot = AlphaSlot::hamiltonian) {
  const auto th = step_angles(s, alpha, beta, slot);
  if (s == 0) return omega;
  const CVector& w = omega.amplitudes();
  CVector x = prop.exp_i((1.0 - kPhi) * th.hamiltonian, w);
  x = rank_one_phase(w, -(1.0 + kPhi) * th.state, x);
  x = prop.exp_i(-th.hamiltonian, x);
  x = rank_one_phase(w, kPhi * th.state, x);
  x = prop.exp_i(kPhi * th.hamiltonian, x);
  return StateVector(omega.num_qubits(), std::move(x));
}

inline StateVector hopf_step(const StateVector& omega, const PauliSum& h, Real s, Real alpha = 1.0, Real beta = 1.0) {
  return hopf_step(omega, Propagator(h), s, alpha, beta);
}

inline StateVector apply_step(Formula f, const StateVector& omega, const Propagator& prop, Real s,
                              const StepConfig& cfg) {
  return f == Formula::gc ? gc_step(omega, prop, s, cfg.alpha, cfg.beta, cfg.alpha_slot)
                          : hopf_step(omega, prop, s, cfg.alpha, cfg.beta, cfg.alpha_slot);
}

/// e^{s [omega, H]} |omega>, exactly. The generator has rank two and acts as a rotation
/// in span{omega, (H - E) omega} by angle s sqrt(V).
inline StateVector bracket_flow_target(const StateVector& omega, const PauliSum& h, Real s) {
  const CVector& w = omega.amplitudes();
  const CVector hw = h.apply(w);
  const Real e = w.dot(hw).real();
  const CVector perp = hw - e * w;
  const Real sd = perp.norm();
  if (sd == 0.0) return omega;
  const Real angle = s * sd;
  return StateVector::normalized(omega.num_qubits(), std::cos(angle) * w - std::sin(angle) * (perp / sd));
}

/// Candidate step durations in ascending order.
inline std::vector<Real> step_grid(const StepConfig& cfg) {
  cfg.validate();
  std::vector<Real> g(static_cast<std::size_t>(cfg.grid_points));
  const int n = cfg.grid_points;
  for (int j = 1; j <= n; ++j) {
    g[static_cast<std::size_t>(j - 1)] =
        cfg.grid_spacing == GridSpacing::linear
            ? cfg.grid_max * j / n
            : cfg.grid_max * std::pow(cfg.grid_min_ratio, static_cast<Real>(n - j) / (n - 1));
  }
  return g;
}

struct GridStepResult {
  Real s_best = 0;
  StateVector omega_next;
  Real energy = 0;
  bool improved = false;
};

/// Evaluates the configured step at every grid point and keeps the lowest energy,
/// breaking ties toward the smaller s. When nothing beats the current energy the best
/// point is still returned, with improved = false.
inline GridStepResult grid_search_step(const StateVector& omega, const PauliSum& h, const Propagator& prop,
                                       const StepConfig& cfg, std::optional<std::vector<Real>> grid = std::nullopt) {
  const std::vector<Real> pts = grid ? *grid : step_grid(cfg);
  if (pts.empty()) throw std::invalid_argument("grid_search_step: empty grid");
  const Real e0 = energy(omega, h);
  const Real tol = 1e-12 * std::max(1.0, std::abs(e0));
  std::optional<GridStepResult> best;
  for (Real s : pts) {
    StateVector cand = apply_step(cfg.formula, omega, prop, s, cfg);
    const Real e = energy(cand, h);
    if (!best || e < best->energy - tol) best = GridStepResult{s, std::move(cand), e, false};
  }
  best->improved = best->energy < e0 - tol;
  return std::move(*best);
}

struct DBQITETrajectory {
  struct Row {
    int k = 0;
    std::optional<Real> s;  // step taken from this row's state (absent on the last row)
    Real duration = 0;      // sum of s_j for j < k
    Real energy = 0;
    Real variance = 0;
    std::vector<Real> fidelities;
    std::optional<bool> improved;
  };

  StepConfig config;
  std::vector<int> tracked;
  std::vector<Row> rows;
  std::vector<StateVector> states;

  std::vector<Real> schedule() const {
    std::vector<Real> s;
    for (const auto& r : rows)
      if (r.s) s.push_back(*r.s);
    return s;
  }
};

/// Runs K grid-searched DB-QITE steps, recording energy, variance and eigenstate fidelities.
inline DBQITETrajectory run_dbqite(const StateVector& omega0, const PauliSum& h, const Propagator& prop, int K,
                                   const StepConfig& cfg, const std::vector<int>& tracked = {0, 1}) {
  if (K < 0) throw std::invalid_argument("run_dbqite: K must be >= 0");
  cfg.validate();
  const auto grid = step_grid(cfg);
  DBQITETrajectory t;
  t.config = cfg;
  t.tracked = tracked;
  StateVector omega = omega0;
  Real duration = 0;
  for (int k = 0; k <= K; ++k) {
    DBQITETrajectory::Row row;
    row.k = k;
    row.duration = duration;
    const auto st = energy_stats(omega, h);
    row.energy = st.energy;
    row.variance = st.variance;
    for (int j : tracked) row.fidelities.push_back(prop.eigen_fidelity(omega, j));
    t.states.push_back(omega);
    if (k < K) {
      auto step = grid_search_step(omega, h, prop, cfg, grid);
      row.s = step.s_best;
      row.improved = step.improved;
      duration += step.s_best;
      omega = std::move(step.omega_next);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace dbqite
