#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>

#include "dbqite/circuit.hpp"
#include "dbqite/dense.hpp"
#include "dbqite/state.hpp"

namespace dbqite {

using Mat2 = Eigen::Matrix2cd;

/// 2x2 matrix of a single-qubit gate.
inline Mat2 gate_matrix(const Gate& g) {
  Mat2 m;
  const Real r = 1.0 / std::sqrt(2.0);
  switch (g.kind) {
    case GateKind::H: m << r, r, r, -r; break;
    case GateKind::S: m << 1, 0, 0, kI; break;
    case GateKind::Sdg: m << 1, 0, 0, -kI; break;
    case GateKind::T: m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4); break;
    case GateKind::Tdg: m << 1, 0, 0, std::polar(1.0, -std::numbers::pi / 4); break;
    case GateKind::X: m << 0, 1, 1, 0; break;
    case GateKind::RZ: m << std::polar(1.0, -0.5 * g.params[0]), 0, 0, std::polar(1.0, 0.5 * g.params[0]); break;
    case GateKind::PHASE: m << 1, 0, 0, std::polar(1.0, g.params[0]); break;
    case GateKind::U3: {
      const Real t = g.params[0], p = g.params[1], l = g.params[2];
      m << std::cos(t / 2), -std::polar(1.0, l) * std::sin(t / 2), std::polar(1.0, p) * std::sin(t / 2),
          std::polar(1.0, p + l) * std::cos(t / 2);
      break;
    }
    default: throw std::invalid_argument("gate_matrix: not a single-qubit gate");
  }
  return m;
}

struct SimResult {
  StateVector final_state;
  Real ancilla_residual = 0;  // population outside the all-zero ancilla subspace
};

/// In-place statevector executor for one circuit width. Not shareable mid-run.
class StatevectorSimulator {
 public:
  static constexpr int kNormCheckInterval = 64;

  explicit StatevectorSimulator(int width) : width_(width) {
    if (width < 1 || width > kMaxSimQubits) {
      throw CapacityError("simulator: width " + std::to_string(width) + " exceeds " + std::to_string(kMaxSimQubits));
    }
  }

  /// Applies every gate of c to the full-width amplitude vector.
  void run(const Circuit& c, CVector& amps) {
    if (c.width() > width_) throw std::invalid_argument("simulator: circuit wider than register");
    if (amps.size() != static_cast<Eigen::Index>(dim_of(width_))) throw std::invalid_argument("simulator: bad buffer");
    data_ = c.data_qubits();
    c.for_each_gate([&](const Gate& g) {
      apply(g, c, amps);
      if (++applied_ % kNormCheckInterval == 0) {
        const Real dev = std::abs(amps.norm() - 1.0);
        if (dev > 1e-10) throw ContractViolation("simulator: norm drift " + std::to_string(dev));
      }
    });
  }

  void apply(const Gate& g, const Circuit& owner, CVector& amps) {
    const std::uint64_t dim = dim_of(width_);
    Complex* a = amps.data();
    const auto bit = [&](int q) { return std::uint64_t{1} << bit_of(q, width_); };
    switch (g.kind) {
      case GateKind::CX: {
        const auto c = bit(g.qubits[0]), t = bit(g.qubits[1]);
        for (std::uint64_t i = 0; i < dim; ++i)
          if ((i & c) && !(i & t)) std::swap(a[i], a[i | t]);
        return;
      }
      case GateKind::CCX: {
        const auto c1 = bit(g.qubits[0]), c2 = bit(g.qubits[1]), t = bit(g.qubits[2]);
        for (std::uint64_t i = 0; i < dim; ++i)
          if ((i & c1) && (i & c2) && !(i & t)) std::swap(a[i], a[i | t]);
        return;
      }
      case GateKind::EXPH: apply_exph(g.params[0], owner, amps); return;
      default: break;
    }
    const Mat2 m = gate_matrix(g);
    const auto t = bit(g.qubits[0]);
    if (m(0, 1) == Complex{} && m(1, 0) == Complex{}) {
      const Complex d0 = m(0, 0), d1 = m(1, 1);
      for (std::uint64_t i = 0; i < dim; ++i) a[i] *= (i & t) ? d1 : d0;
      return;
    }
    for (std::uint64_t i = 0; i < dim; ++i) {
      if (i & t) continue;
      const Complex x0 = a[i], x1 = a[i | t];
      a[i] = m(0, 0) * x0 + m(0, 1) * x1;
      a[i | t] = m(1, 0) * x0 + m(1, 1) * x1;
    }
  }

 private:
  /// e^{i theta H} on the data register, slice by slice over ancilla patterns.
  void apply_exph(Real theta, const Circuit& owner, CVector& amps) {
    const auto& h = owner.hamiltonian();
    if (!h) throw ContractViolation("simulator: EXPH without Hamiltonian");
    auto& prop = propagators_[h.get()];
    if (!prop) prop = std::make_unique<Propagator>(*h);
    const int nanc = width_ - data_;
    const auto ddim = static_cast<Eigen::Index>(dim_of(data_));
    CVector slice(ddim);
    for (std::uint64_t anc = 0; anc < dim_of(nanc); ++anc) {
      bool any = false;
      for (Eigen::Index d = 0; d < ddim; ++d) {
        slice[d] = amps[static_cast<Eigen::Index>((static_cast<std::uint64_t>(d) << nanc) | anc)];
        any = any || slice[d] != Complex{};
      }
      if (!any) continue;
      const CVector out = prop->exp_i(theta, slice);
      for (Eigen::Index d = 0; d < ddim; ++d)
        amps[static_cast<Eigen::Index>((static_cast<std::uint64_t>(d) << nanc) | anc)] = out[d];
    }
  }

  int width_;
  int data_ = 0;
  std::int64_t applied_ = 0;
  std::map<const PauliSum*, std::unique_ptr<Propagator>> propagators_;
};

/// Runs c on input (data qubits) tensored with |0> ancillas and traces the ancillas out.
/// Throws if the ancillas are left with population >= 1e-10 outside |0...0>.
inline SimResult run_circuit(const Circuit& c, const StateVector& input) {
  if (input.num_qubits() != c.data_qubits()) throw std::invalid_argument("run_circuit: input width != data qubits");
  const int w = c.width();
  const int nanc = c.ancilla_qubits();
  StatevectorSimulator sim(w);
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(dim_of(w)));
  for (Eigen::Index d = 0; d < input.dim(); ++d) amps[static_cast<Eigen::Index>(static_cast<std::uint64_t>(d) << nanc)] = input[d];
  sim.run(c, amps);
  CVector clean(input.dim());
  for (Eigen::Index d = 0; d < input.dim(); ++d) clean[d] = amps[static_cast<Eigen::Index>(static_cast<std::uint64_t>(d) << nanc)];
  const Real residual = std::clamp(1.0 - clean.squaredNorm(), 0.0, 1.0);
  if (residual >= 1e-10) {
    throw ContractViolation("run_circuit: ancillas not returned to |0> (residual " + std::to_string(residual) + ")");
  }
  return SimResult{StateVector::normalized(input.num_qubits(), clean), residual};
}

/// Full-register unitary, one column per computational basis input. Width <= 12.
inline DenseOperator circuit_unitary(const Circuit& c) {
  const int w = c.width();
  if (w > kMaxUnitaryQubits) throw CapacityError("circuit_unitary: width " + std::to_string(w) + " exceeds 12");
  const auto dim = static_cast<Eigen::Index>(dim_of(w));
  CMatrix u(dim, dim);
  StatevectorSimulator sim(w);
  for (Eigen::Index col = 0; col < dim; ++col) {
    CVector v = CVector::Zero(dim);
    v[col] = 1.0;
    sim.run(c, v);
    u.col(col) = v;
  }
  return DenseOperator(std::move(u));
}

/// Block of the circuit unitary with ancillas in |0> on input and output.
inline DenseOperator data_unitary(const Circuit& c) {
  const DenseOperator full = circuit_unitary(c);
  const int nanc = c.ancilla_qubits();
  const auto ddim = static_cast<Eigen::Index>(dim_of(c.data_qubits()));
  CMatrix u(ddim, ddim);
  for (Eigen::Index r = 0; r < ddim; ++r)
    for (Eigen::Index col = 0; col < ddim; ++col) u(r, col) = full(r << nanc, col << nanc);
  return DenseOperator(std::move(u));
}

}  // namespace dbqite
