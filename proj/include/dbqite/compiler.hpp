#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "dbqite/circuit.hpp"
#include "dbqite/engine.hpp"
#include "dbqite/pauli.hpp"

namespace dbqite {

/// Partition of term indices into layers whose members act on pairwise disjoint qubits.
using LayerAssignment = std::vector<std::vector<std::size_t>>;

/// Greedy largest-degree-first coloring of the support-overlap graph, done separately
/// for each letter family (XX, YY, ZZ, Z, ...) so that a layer holds one kind of rotation.
/// Layers are emitted family by family, in order of first appearance.
inline LayerAssignment color_layers(const PauliSum& h) {
  const auto& terms = h.terms();
  std::vector<std::string> families;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto f = terms[i].family();
    auto it = std::find(families.begin(), families.end(), f);
    if (it == families.end()) {
      families.push_back(f);
      members.emplace_back();
      it = std::prev(families.end());
    }
    members[static_cast<std::size_t>(it - families.begin())].push_back(i);
  }
  LayerAssignment layers;
  for (const auto& group : members) {
    const std::size_t m = group.size();
    std::vector<std::uint64_t> supp(m);
    for (std::size_t a = 0; a < m; ++a)
      for (int q : terms[group[a]].support()) supp[a] |= std::uint64_t{1} << q;
    std::vector<std::vector<std::size_t>> adj(m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        if (supp[a] & supp[b]) {
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return adj[a].size() > adj[b].size(); });
    std::vector<int> color(m, -1);
    int ncolors = 0;
    for (std::size_t v : order) {
      std::vector<bool> used(static_cast<std::size_t>(ncolors) + 1, false);
      for (std::size_t u : adj[v])
        if (color[u] >= 0) used[static_cast<std::size_t>(color[u])] = true;
      int c = 0;
      while (used[static_cast<std::size_t>(c)]) ++c;
      color[v] = c;
      ncolors = std::max(ncolors, c + 1);
    }
    const std::size_t base = layers.size();
    layers.resize(base + static_cast<std::size_t>(ncolors));
    for (std::size_t a = 0; a < m; ++a) layers[base + static_cast<std::size_t>(color[a])].push_back(group[a]);
  }
  return layers;
}

/// True when every layer's terms have pairwise disjoint support and every term appears once.
inline bool layers_valid(const PauliSum& h, const LayerAssignment& layers) {
  std::vector<int> seen(h.terms().size(), 0);
  for (const auto& layer : layers) {
    std::uint64_t used = 0;
    for (std::size_t i : layer) {
      if (i >= seen.size()) return false;
      ++seen[i];
      std::uint64_t s = 0;
      for (int q : h.terms()[i].support()) s |= std::uint64_t{1} << q;
      if (used & s) return false;
      used |= s;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

namespace detail {

inline void to_z_basis(Circuit& c, int q, char letter) {
  if (letter == 'X') {
    c.add(Gate::one(GateKind::H, q));
  } else if (letter == 'Y') {
    c.add(Gate::one(GateKind::Sdg, q));
    c.add(Gate::one(GateKind::H, q));
  }
}

inline void from_z_basis(Circuit& c, int q, char letter) {
  if (letter == 'X') {
    c.add(Gate::one(GateKind::H, q));
  } else if (letter == 'Y') {
    c.add(Gate::one(GateKind::H, q));
    c.add(Gate::one(GateKind::S, q));
  }
}

}  // namespace detail

/// Appends e^{i angle P} for a Pauli string of weight <= 2 (identity terms are a global phase
/// and emit nothing). Weight-2 strings compile to basis change, CX, RZ(-2 angle), CX, basis change.
inline void append_pauli_rotation(Circuit& c, const PauliString& p, Real angle) {
  const auto s = p.support();
  if (s.size() > 2) throw std::invalid_argument("append_pauli_rotation: weight > 2 is unsupported");
  if (s.empty()) return;
  for (int q : s) detail::to_z_basis(c, q, p[q]);
  if (s.size() == 1) {
    c.add(Gate::one(GateKind::RZ, s[0], -2.0 * angle));
  } else {
    c.add(Gate::cx(s[0], s[1]));
    c.add(Gate::one(GateKind::RZ, s[1], -2.0 * angle));
    c.add(Gate::cx(s[0], s[1]));
  }
  for (int q : s) detail::from_z_basis(c, q, p[q]);
}

/// Product-formula circuit for e^{i theta H} over `steps` repetitions. Order 2 is the
/// symmetric (Strang) sweep over color layers with the middle layer fused; order 1 is a
/// plain layer sweep.
inline Circuit compile_trotter(const PauliSum& h, Real theta, int steps = 2, int order = 2) {
  if (steps < 1) throw std::invalid_argument("compile_trotter: steps must be >= 1");
  if (order != 1 && order != 2) throw std::invalid_argument("compile_trotter: order must be 1 or 2");
  if (h.max_weight() > 2) throw std::invalid_argument("compile_trotter: only two-local Hamiltonians are supported");
  const auto layers = color_layers(h);
  const int n = h.num_qubits();
  Circuit c(n, n);
  const Real dt = theta / steps;
  const auto emit_layer = [&](const std::vector<std::size_t>& layer, Real t) {
    for (std::size_t i : layer) {
      const auto& term = h.terms()[i];
      append_pauli_rotation(c, term, t * term.coefficient());
    }
  };
  for (int r = 0; r < steps; ++r) {
    if (order == 1 || layers.size() == 1) {
      for (const auto& layer : layers) emit_layer(layer, dt);
      continue;
    }
    const std::size_t m = layers.size();
    for (std::size_t l = 0; l + 1 < m; ++l) emit_layer(layers[l], 0.5 * dt);
    emit_layer(layers[m - 1], dt);
    for (std::size_t l = m - 1; l-- > 0;) emit_layer(layers[l], 0.5 * dt);
  }
  c.metadata()["trotter_order"] = std::to_string(order);
  c.metadata()["trotter_steps"] = std::to_string(steps);
  c.metadata()["trotter_layers"] = std::to_string(layers.size());
  return c;
}

/// How the all-zero test of a reflection is computed.
enum class AndStyle {
  logical_and,  // 3-CX relative-phase AND built from H, T, T^dagger and CX; uncomputed by its inverse
  toffoli,      // exact CCX gates
};

namespace detail {

/// Computes a AND b into a fresh |0> target, exactly up to a diagonal phase that the
/// mirrored uncomputation cancels.
inline void append_logical_and(Circuit& c, int a, int b, int target) {
  c.add(Gate::one(GateKind::H, target));
  c.add(Gate::one(GateKind::T, target));
  c.add(Gate::cx(b, target));
  c.add(Gate::one(GateKind::Tdg, target));
  c.add(Gate::cx(a, target));
  c.add(Gate::one(GateKind::T, target));
  c.add(Gate::cx(b, target));
  c.add(Gate::one(GateKind::Tdg, target));
  c.add(Gate::one(GateKind::H, target));
}

}  // namespace detail

/// Number of ancillas compile_reflection allocates for n data qubits.
inline int reflection_ancillas(int n) { return std::max(0, n - 1); }

/// e^{i theta |0...0><0...0|} on n data qubits: flip to an all-ones test, compute the AND of
/// all qubits into a fresh ancilla through a balanced tree of n-1 two-input ANDs, apply one
/// PHASE(theta) to it, then mirror the computation. Ancillas finish in |0>.
inline Circuit compile_reflection(int n, Real theta, AndStyle style = AndStyle::logical_and) {
  if (n < 1) throw std::invalid_argument("compile_reflection: n must be >= 1");
  Circuit c(n + reflection_ancillas(n), n);
  for (int q = 0; q < n; ++q) c.add(Gate::one(GateKind::X, q));
  struct And {
    int a, b, target;
  };
  std::vector<And> ands;
  std::vector<int> level(static_cast<std::size_t>(n));
  std::iota(level.begin(), level.end(), 0);
  int next_anc = n;
  while (level.size() > 1) {
    std::vector<int> up;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      ands.push_back({level[i], level[i + 1], next_anc});
      up.push_back(next_anc++);
    }
    if (level.size() % 2) up.push_back(level.back());
    level = std::move(up);
  }
  Circuit compute(c.width(), n);
  for (const auto& g : ands) {
    if (style == AndStyle::toffoli) {
      compute.add(Gate::ccx(g.a, g.b, g.target));
    } else {
      detail::append_logical_and(compute, g.a, g.b, g.target);
    }
  }
  c.append(compute);
  c.add(Gate::one(GateKind::PHASE, level.front(), theta));
  c.append(inverse(compute));
  for (int q = 0; q < n; ++q) c.add(Gate::one(GateKind::X, q));
  c.metadata()["reflection_and_style"] = style == AndStyle::toffoli ? "toffoli" : "logical_and";
  return c;
}

/// Entangling-gate formula for the measurement-based uncomputation variant (reported only;
/// the simulator is measurement-free).
inline Real reflection_entangling_with_measurement(int n) { return 3.5 * n - 4.0; }

/// Circuit preparing the singlet product state from |0...0> (up to the global phase (-1)^{L/2}).
inline Circuit singlet_preparation(int L) {
  if (L < 2 || L % 2) throw std::invalid_argument("singlet_preparation: L must be even and >= 2");
  Circuit c(L, L);
  for (int i = 0; i < L; i += 2) {
    c.add(Gate::one(GateKind::X, i));
    c.add(Gate::one(GateKind::H, i));
    c.add(Gate::one(GateKind::X, i + 1));
    c.add(Gate::cx(i, i + 1));
  }
  return c;
}

enum class EvolutionMode {
  trotter,  // gate-level product formula
  exact,    // one opaque EXPH gate per exponential; simulation only
};

inline std::string_view to_string(EvolutionMode m) { return m == EvolutionMode::trotter ? "trotter" : "exact"; }
inline EvolutionMode parse_evolution_mode(std::string_view s) {
  if (s == "trotter") return EvolutionMode::trotter;
  if (s == "exact" || s == "exact-evolution") return EvolutionMode::exact;
  throw std::invalid_argument("unknown evolution mode '" + std::string(s) + "' (expected trotter|exact)");
}

struct SynthesisConfig {
  Formula formula = Formula::gc;
  EvolutionMode mode = EvolutionMode::trotter;
  int trotter_steps = 2;
  int trotter_order = 2;
  Real alpha = 10.0;
  Real beta = 1.0;
  AlphaSlot alpha_slot = AlphaSlot::hamiltonian;
  AndStyle and_style = AndStyle::logical_and;
};

namespace detail {

class Synthesizer {
 public:
  Synthesizer(const PauliSum& h, const SynthesisConfig& cfg)
      : h_(std::make_shared<const PauliSum>(h)), cfg_(cfg) {}

  std::shared_ptr<const Circuit> evolution(Real theta, int width) const {
    const int n = h_->num_qubits();
    auto c = std::make_shared<Circuit>(width, n);
    if (cfg_.mode == EvolutionMode::exact) {
      c->set_hamiltonian(h_);
      c->add(Gate::exph(theta));
    } else {
      c->append(compile_trotter(*h_, theta, cfg_.trotter_steps, cfg_.trotter_order));
    }
    return c;
  }

  std::shared_ptr<const Circuit> reflection(Real theta, int width) const {
    auto c = std::make_shared<Circuit>(width, h_->num_qubits());
    c->append(compile_reflection(h_->num_qubits(), theta, cfg_.and_style));
    return c;
  }

  /// e^{i c omega_k} = U_k R(c) U_k^dagger, appended in time order.
  void conjugated_reflection(Circuit& out, const std::shared_ptr<const Circuit>& uk, Real theta) const {
    out.call(uk, true);
    out.call(reflection(theta, out.width()));
    out.call(uk, false);
  }

  std::shared_ptr<const Circuit> level(const std::shared_ptr<const Circuit>& uk, Real s) const {
    const auto th = step_angles(s, cfg_.alpha, cfg_.beta, cfg_.alpha_slot);
    const int width = uk->width();
    auto c = std::make_shared<Circuit>(width, uk->data_qubits());
    if (cfg_.formula == Formula::gc) {
      // U_{k+1} = e^{i tH H} U_k R U_k^dagger e^{-i tH H} U_k
      c->call(uk);
      c->call(evolution(-th.hamiltonian, width));
      conjugated_reflection(*c, uk, th.state);
      c->call(evolution(th.hamiltonian, width));
    } else {
      // U_{k+1} = e^{i phi tH H} e^{i phi tw w} e^{-i tH H} e^{-i (1+phi) tw w} e^{i (1-phi) tH H} U_k
      c->call(uk);
      c->call(evolution((1.0 - kPhi) * th.hamiltonian, width));
      conjugated_reflection(*c, uk, -(1.0 + kPhi) * th.state);
      c->call(evolution(-th.hamiltonian, width));
      conjugated_reflection(*c, uk, kPhi * th.state);
      c->call(evolution(kPhi * th.hamiltonian, width));
    }
    return c;
  }

 private:
  std::shared_ptr<const PauliSum> h_;
  SynthesisConfig cfg_;
};

}  // namespace detail

/// Recursive DB-QITE circuit U_k built from a preparation circuit U_0 and the schedule
/// s_0..s_{k-1}. U_k is shared, not copied, between its three (GC) or five (HOPF) uses
/// per level; U_k^dagger is the formal gate-by-gate inverse.
inline std::shared_ptr<const Circuit> synthesize(const Circuit& u0, const PauliSum& h, const std::vector<Real>& schedule,
                                                 int k, const SynthesisConfig& cfg) {
  if (k < 0) throw std::invalid_argument("synthesize: k must be >= 0");
  if (static_cast<int>(schedule.size()) < k) {
    throw std::invalid_argument("synthesize: schedule has " + std::to_string(schedule.size()) + " entries, need " +
                                std::to_string(k));
  }
  if (u0.data_qubits() != h.num_qubits()) throw std::invalid_argument("synthesize: U0 data width != Hamiltonian width");
  const int n = h.num_qubits();
  const int width = std::max(u0.width(), n + (k > 0 ? reflection_ancillas(n) : 0));
  auto base = std::make_shared<Circuit>(width, n);
  base->set_hamiltonian(u0.hamiltonian());
  base->append(u0);
  base->set_u0_queries(1);
  std::shared_ptr<const Circuit> uk = base;
  const detail::Synthesizer synth(h, cfg);
  for (int j = 0; j < k; ++j) uk = synth.level(uk, schedule[static_cast<std::size_t>(j)]);
  auto out = std::make_shared<Circuit>(*uk);
  auto& meta = out->metadata();
  meta["formula"] = std::string(to_string(cfg.formula));
  meta["mode"] = std::string(to_string(cfg.mode));
  meta["k"] = std::to_string(k);
  meta["alpha"] = std::to_string(cfg.alpha);
  meta["beta"] = std::to_string(cfg.beta);
  meta["alpha_slot"] = std::string(to_string(cfg.alpha_slot));
  if (cfg.mode == EvolutionMode::trotter) {
    meta["trotter_order"] = std::to_string(cfg.trotter_order);
    meta["trotter_steps"] = std::to_string(cfg.trotter_steps);
  }
  return out;
}

inline std::shared_ptr<const Circuit> synthesize_dbqite(const Circuit& u0, const PauliSum& h,
                                                        const std::vector<Real>& schedule, int k,
                                                        SynthesisConfig cfg = {}) {
  cfg.formula = Formula::gc;
  return synthesize(u0, h, schedule, k, cfg);
}

inline std::shared_ptr<const Circuit> synthesize_hopf(const Circuit& u0, const PauliSum& h,
                                                      const std::vector<Real>& schedule, int k,
                                                      SynthesisConfig cfg = {}) {
  cfg.formula = Formula::hopf;
  return synthesize(u0, h, schedule, k, cfg);
}

}  // namespace dbqite
