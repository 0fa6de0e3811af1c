#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "dbqite/dense.hpp"
#include "dbqite/pauli.hpp"
#include "dbqite/state.hpp"

namespace dbqite {

/// <psi|H|psi>
inline Real energy(const StateVector& psi, const PauliSum& h) {
  const Complex e = psi.amplitudes().dot(h.apply(psi.amplitudes()));
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
    throw ContractViolation("energy: expectation value has imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

/// <H^2> - <H>^2, evaluated as ||(H - E) psi||^2 so it cannot go negative.
inline Real variance(const StateVector& psi, const PauliSum& h) {
  const CVector hpsi = h.apply(psi.amplitudes());
  const Real e = psi.amplitudes().dot(hpsi).real();
  return (hpsi - e * psi.amplitudes()).squaredNorm();
}

struct EnergyStats {
  Real energy = 0;
  Real variance = 0;
};

inline EnergyStats energy_stats(const StateVector& psi, const PauliSum& h) {
  const CVector hpsi = h.apply(psi.amplitudes());
  const Real e = psi.amplitudes().dot(hpsi).real();
  return {e, (hpsi - e * psi.amplitudes()).squaredNorm()};
}

/// Exact normalized imaginary-time evolution e^{-tau H}|psi0> / ||.||, computed in
/// the eigenbasis in log space so neither overflow nor underflow can occur.
class ImaginaryTimeEvolver {
 public:
  explicit ImaginaryTimeEvolver(std::shared_ptr<const Propagator> prop) : prop_(std::move(prop)) {}
  explicit ImaginaryTimeEvolver(const PauliSum& h) : prop_(std::make_shared<Propagator>(h)) {}

  const Propagator& propagator() const { return *prop_; }

  StateVector evolve(const StateVector& psi0, Real tau) const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("ite_evolve: tau must be finite and >= 0");
    if (tau == 0.0) return psi0;
    return from_coefficients(psi0.num_qubits(), prop_->coefficients(psi0.amplitudes()), tau);
  }

  /// Evolves a fixed state to many durations, reusing its eigenbasis coefficients.
  std::vector<StateVector> evolve_all(const StateVector& psi0, const std::vector<Real>& taus) const {
    const CVector c = prop_->coefficients(psi0.amplitudes());
    std::vector<StateVector> out;
    out.reserve(taus.size());
    for (Real tau : taus) {
      if (!(tau >= 0.0)) throw std::invalid_argument("ite_evolve: tau must be >= 0");
      out.push_back(tau == 0.0 ? psi0 : from_coefficients(psi0.num_qubits(), c, tau));
    }
    return out;
  }

 private:
  StateVector from_coefficients(int n, const CVector& c, Real tau) const {
    const RVector& lam = prop_->spectrum().values;
    RVector logw(c.size());
    Real top = -std::numeric_limits<Real>::infinity();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const Real mag = std::abs(c[i]);
      logw[i] = mag > 0 ? std::log(mag) - tau * (lam[i] - lam[0]) : -std::numeric_limits<Real>::infinity();
      top = std::max(top, logw[i]);
    }
    if (!std::isfinite(top)) throw ContractViolation("ite_evolve: state annihilated (zero vector)");
    CVector a(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const Real mag = std::abs(c[i]);
      a[i] = mag > 0 ? (c[i] / mag) * std::exp(logw[i] - top) : Complex{};
    }
    return StateVector::normalized(n, prop_->from_coefficients(a));
  }

  std::shared_ptr<const Propagator> prop_;
};

inline StateVector ite_evolve(const StateVector& psi0, const PauliSum& h, Real tau) {
  return ImaginaryTimeEvolver(h).evolve(psi0, tau);
}

/// Observables of an exact ITE run on a tau grid.
struct ITETrajectory {
  std::vector<Real> taus;
  std::vector<Real> energies;
  std::vector<Real> variances;
  std::vector<int> tracked;                      // eigenindices
  std::vector<std::vector<Real>> fidelities;     // [tau][tracked]
  std::vector<StateVector> states;
};

inline std::vector<Real> linear_grid(Real lo, Real hi, int points) {
  if (points < 2) throw std::invalid_argument("linear_grid: need at least 2 points");
  std::vector<Real> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

inline ITETrajectory ite_trajectory(const ImaginaryTimeEvolver& ite, const PauliSum& h, const StateVector& psi0,
                                    const std::vector<Real>& taus, const std::vector<int>& tracked,
                                    bool keep_states = false) {
  ITETrajectory t;
  t.taus = taus;
  t.tracked = tracked;
  const auto states = ite.evolve_all(psi0, taus);
  for (const auto& s : states) {
    const auto st = energy_stats(s, h);
    t.energies.push_back(st.energy);
    t.variances.push_back(st.variance);
    std::vector<Real> f;
    for (int k : tracked) f.push_back(ite.propagator().eigen_fidelity(s, k));
    t.fidelities.push_back(std::move(f));
  }
  if (keep_states) t.states = states;
  return t;
}

/// grad_P L_B(P) = -[[P, B], P]
inline DenseOperator riemannian_gradient(const DenseOperator& p, const DenseOperator& b) {
  if (!p.is_hermitian() || !b.is_hermitian()) throw ContractViolation("riemannian_gradient: inputs must be Hermitian");
  const CMatrix pb = p.matrix() * b.matrix() - b.matrix() * p.matrix();
  const CMatrix g = -(pb * p.matrix() - p.matrix() * pb);
  return DenseOperator(0.5 * (g + g.adjoint()), true);
}

/// L_B(P) = -1/2 ||P - B||_HS^2
inline Real loss(const DenseOperator& p, const DenseOperator& b) {
  DenseOperator::check_dims(p, b);
  return -0.5 * (p.matrix() - b.matrix()).squaredNorm();
}

/// Right-hand side of the double-bracket flow dA/dt = [[A, B], A].
inline CMatrix double_bracket(const CMatrix& a, const CMatrix& b) {
  const CMatrix ab = a * b - b * a;
  return ab * a - a * ab;
}

/// One classical RK4 step of the double-bracket flow (dt may be negative).
inline CMatrix flow_step_rk4(const CMatrix& a, const CMatrix& b, Real dt) {
  const CMatrix k1 = double_bracket(a, b);
  const CMatrix k2 = double_bracket(a + 0.5 * dt * k1, b);
  const CMatrix k3 = double_bracket(a + 0.5 * dt * k2, b);
  const CMatrix k4 = double_bracket(a + dt * k3, b);
  return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Symmetric difference quotient of f at x, optionally with one Richardson level
/// (combining steps dt and dt/2), which lifts the error from O(dt^2) to O(dt^4).
inline Real central_difference(const std::function<Real(Real)>& f, Real x, Real dt, bool richardson = true) {
  const auto d = [&](Real h) { return (f(x + h) - f(x - h)) / (2.0 * h); };
  if (!richardson) return d(dt);
  return (4.0 * d(0.5 * dt) - d(dt)) / 3.0;
}

/// || dPsi/dtau - [[Psi, H], Psi] ||_HS with dPsi/dtau from a central difference of psi_fn.
inline Real dbf_residual(const std::function<StateVector(Real)>& psi_fn, const PauliSum& h, Real tau,
                         Real dt = 1e-4) {
  if (!(dt > 0)) throw std::invalid_argument("dbf_residual: dt must be positive");
  const DenseOperator hd = to_dense(h);
  const auto proj = [&](Real t) { return DenseOperator::projector(psi_fn(t)).matrix(); };
  const CMatrix deriv = (proj(tau + dt) - proj(tau - dt)) / (2.0 * dt);
  return (deriv - double_bracket(proj(tau), hd.matrix())).norm();
}

struct LossRate {
  Real lhs = 0;  // finite-difference dL/dtau along the flow
  Real rhs = 0;  // -||[A, B]||_HS^2
};

/// Compares the measured loss rate along the double-bracket flow from A with -||[A,B]||^2.
/// The flow is advanced by single RK4 steps (error O(dt^5)); the derivative uses
/// a Richardson-extrapolated central difference.
inline LossRate loss_rate_check(const DenseOperator& a, const DenseOperator& b, Real dt = 1e-4) {
  if (!a.is_hermitian() || !b.is_hermitian()) throw ContractViolation("loss_rate_check: inputs must be Hermitian");
  DenseOperator::check_dims(a, b);
  const auto loss_at = [&](Real t) {
    const CMatrix at = t == 0 ? a.matrix() : flow_step_rk4(a.matrix(), b.matrix(), t);
    return -0.5 * (at - b.matrix()).squaredNorm();
  };
  LossRate r;
  r.lhs = central_difference(loss_at, 0.0, dt, true);
  r.rhs = -commutator(a, b).matrix().squaredNorm();
  return r;
}

}  // namespace dbqite
