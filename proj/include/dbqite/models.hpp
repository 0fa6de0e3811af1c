#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "dbqite/dense.hpp"
#include "dbqite/pauli.hpp"
#include "dbqite/state.hpp"

namespace dbqite {

enum class Boundary { open, periodic };

inline std::string_view to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

inline Boundary parse_boundary(std::string_view s) {
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "' (expected open|periodic)");
}

/// Transverse-field Heisenberg chain J sum (XX+YY+ZZ) + B sum Z.
/// Open boundaries are the default: they reproduce the reference singlet overlap.
struct HeisenbergParams {
  int L = 10;
  Real J = 1.0;
  Real B = 0.5;
  Boundary boundary = Boundary::open;
};

inline PauliSum build_heisenberg(const HeisenbergParams& p) {
  if (p.L < 2) throw std::invalid_argument("build_heisenberg: L must be >= 2");
  if (!std::isfinite(p.J) || !std::isfinite(p.B)) throw std::invalid_argument("build_heisenberg: non-finite J or B");
  PauliSum h(p.L);
  const int bonds = p.boundary == Boundary::periodic ? p.L : p.L - 1;
  for (int i = 0; i < bonds; ++i) {
    const int j = (i + 1) % p.L;
    for (char axis : {'X', 'Y', 'Z'}) {
      std::string letters(static_cast<std::size_t>(p.L), 'I');
      letters[static_cast<std::size_t>(i)] = axis;
      letters[static_cast<std::size_t>(j)] = axis;
      h.add(letters, p.J);
    }
  }
  for (int i = 0; i < p.L; ++i) {
    std::string letters(static_cast<std::size_t>(p.L), 'I');
    letters[static_cast<std::size_t>(i)] = 'Z';
    h.add(letters, p.B);
  }
  return h;
}

/// 2^{-L/4} (|10> - |01>)^{tensor L/2} on consecutive pairs.
inline StateVector singlet_state(int L) {
  if (L < 2 || L % 2 != 0) throw std::invalid_argument("singlet_state: L must be even and >= 2");
  const Real r = 1.0 / std::sqrt(2.0);
  CVector pair(4);
  pair << 0.0, -r, r, 0.0;  // |00>, |01>, |10>, |11>
  CVector v(1);
  v[0] = 1.0;
  for (int k = 0; k < L / 2; ++k) {
    CVector next(v.size() * 4);
    for (Eigen::Index a = 0; a < v.size(); ++a)
      for (Eigen::Index b = 0; b < 4; ++b) next[a * 4 + b] = v[a] * pair[b];
    v = std::move(next);
  }
  return StateVector(L, std::move(v));
}

/// Initial state biased through an intermediate eigenstate:
/// (|l_high> + 1/2 |l_k> + sqrt(F0) |l_0>) / sqrt(1.25 + F0).
struct SaddleInitSpec {
  int k = 2;
  int high_index = 10;
  Real ground_weight = 1e-6;
};

inline StateVector saddle_state(const EigenSystem& es, const SaddleInitSpec& spec) {
  if (spec.k <= 0 || spec.k >= spec.high_index) {
    throw std::out_of_range("saddle_state: need 0 < k < high_index");
  }
  if (spec.high_index >= es.size()) throw std::out_of_range("saddle_state: high_index exceeds spectrum size");
  if (!(spec.ground_weight >= 0.0)) throw std::invalid_argument("saddle_state: ground_weight must be >= 0");
  const Real norm = std::sqrt(1.25 + spec.ground_weight);
  CVector v = (es.vectors.col(spec.high_index) + 0.5 * es.vectors.col(spec.k) +
               std::sqrt(spec.ground_weight) * es.vectors.col(0)) /
              norm;
  return StateVector(es.num_qubits(), std::move(v));
}

inline StateVector saddle_state(const PauliSum& h, const SaddleInitSpec& spec) {
  return saddle_state(eigh(to_dense(h)), spec);
}

/// Loads an externally prepared state; rejects norm deviations above 1e-6.
inline StateVector load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_state: cannot open '" + path + "'");
  return read_state(in, 1e-6);
}

inline PauliSum load_pauli_sum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open Hamiltonian file '" + path + "'");
  return parse_pauli_sum(in);
}

}  // namespace dbqite
