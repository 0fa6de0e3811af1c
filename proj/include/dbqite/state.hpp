#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dbqite/core.hpp"

namespace dbqite {

/// Unit-norm amplitude vector over n qubits (qubit 0 is the most significant bit).
class StateVector {
 public:
  /// Deviation from unit norm tolerated on construction; the stored vector is rescaled exactly.
  static constexpr Real kNormSlack = 1e-10;

  StateVector(int n, CVector amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    if (n < 1 || n > kMaxSimQubits) throw CapacityError("StateVector: qubit count out of range");
    if (amps_.size() != static_cast<Eigen::Index>(dim_of(n))) {
      throw std::invalid_argument("StateVector: expected " + std::to_string(dim_of(n)) + " amplitudes");
    }
    const Real norm = amps_.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormSlack) {
      throw ContractViolation("StateVector: norm " + std::to_string(norm) + " is not 1");
    }
    amps_ /= norm;
  }

  /// Normalizes any finite nonzero vector.
  static StateVector normalized(int n, const CVector& v) {
    const Real norm = v.norm();
    if (!(norm > 0) || !std::isfinite(norm)) throw ContractViolation("StateVector: cannot normalize zero vector");
    return StateVector(n, v / norm);
  }

  static StateVector basis(int n, std::size_t index) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim_of(n)));
    if (index >= dim_of(n)) throw std::out_of_range("StateVector::basis: index out of range");
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return StateVector(n, std::move(v));
  }

  int num_qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](Eigen::Index i) const { return amps_[i]; }

  StateVector with_phase(Real phi) const { return StateVector(n_, amps_ * std::polar(1.0, phi)); }

 private:
  int n_;
  CVector amps_;
};

inline Complex inner(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("inner: dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());
}

/// |<a|b>|^2, clamped into [0, 1].
inline Real fidelity(const StateVector& a, const StateVector& b) {
  return std::clamp(std::norm(inner(a, b)), 0.0, 1.0);
}

/// min over phi of || a - e^{i phi} b ||.
/// Computed from the aligned difference vector, so it stays accurate far below sqrt(eps).
inline Real phase_aligned_distance(const StateVector& a, const StateVector& b) {
  const Complex ov = inner(b, a);
  const Complex phase = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1.0);
  return (a.amplitudes() - phase * b.amplitudes()).norm();
}

/// Reads `n=<int>` followed by 2^n lines `<re> <im>`. The result must be within
/// `tolerance` of unit norm and is then renormalized.
inline StateVector read_state(std::istream& in, Real tolerance = 1e-6) {
  std::string line;
  int n = -1;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto pos = line.find("n=");
    if (pos == std::string::npos) throw ParseError("statevector: missing 'n=<int>' header");
    try {
      n = std::stoi(line.substr(pos + 2));
    } catch (const std::exception&) {
      throw ParseError("statevector: bad header '" + line + "'");
    }
    break;
  }
  if (n < 1 || n > kMaxSimQubits) throw ParseError("statevector: qubit count missing or out of range");
  const auto dim = static_cast<Eigen::Index>(dim_of(n));
  CVector v(dim);
  Eigen::Index i = 0;
  while (i < dim && std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Real re = 0, im = 0;
    std::string extra;
    if (!(ls >> re >> im) || (ls >> extra)) {
      throw ParseError("statevector: bad amplitude line " + std::to_string(i + 2));
    }
    v[i++] = Complex(re, im);
  }
  if (i != dim) throw ParseError("statevector: expected " + std::to_string(dim) + " amplitude lines");
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw ParseError("statevector: trailing data");
  }
  const Real norm = v.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > tolerance) {
    throw ContractViolation("statevector: norm " + std::to_string(norm) + " deviates from 1 by more than " +
                            std::to_string(tolerance));
  }
  return StateVector(n, v / norm);
}

inline void write_state(std::ostream& out, const StateVector& psi) {
  const auto old = out.precision(17);
  out << "n=" << psi.num_qubits() << '\n';
  for (Eigen::Index i = 0; i < psi.dim(); ++i) out << psi[i].real() << ' ' << psi[i].imag() << '\n';
  out.precision(old);
}

}  // namespace dbqite
