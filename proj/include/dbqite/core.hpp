#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dbqite {

using Real = double;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

/// Largest qubit count for which dense 2^n x 2^n matrices are built.
inline constexpr int kMaxDenseQubits = 14;
/// Largest total width (data + ancilla) the statevector simulator accepts.
inline constexpr int kMaxSimQubits = 26;
/// Largest width for which circuit_unitary enumerates basis columns.
inline constexpr int kMaxUnitaryQubits = 12;

/// Requested object would exceed a memory guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Precondition or internal invariant broken by the caller (or by a compiler bug).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed text/JSON input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::size_t dim_of(int n) { return std::size_t{1} << n; }

/// Bit position of qubit q in an amplitude index; qubit 0 is the most significant bit.
inline int bit_of(int q, int width) { return width - 1 - q; }

}  // namespace dbqite
