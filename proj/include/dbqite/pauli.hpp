#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dbqite/core.hpp"

namespace dbqite {

/// A real-weighted tensor product of single-qubit Paulis, letters in site order.
class PauliString {
 public:
  PauliString(std::string letters, Real coefficient)
      : letters_(std::move(letters)), coefficient_(coefficient) {
    if (letters_.empty()) throw std::invalid_argument("PauliString: empty letter sequence");
    for (char c : letters_) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw std::invalid_argument(std::string("PauliString: invalid letter '") + c + "'");
      }
    }
    if (!std::isfinite(coefficient_)) throw std::invalid_argument("PauliString: non-finite coefficient");
  }

  int size() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  Real coefficient() const { return coefficient_; }
  char operator[](int q) const { return letters_[static_cast<std::size_t>(q)]; }

  /// Qubits carrying a non-identity letter, ascending.
  std::vector<int> support() const {
    std::vector<int> s;
    for (int q = 0; q < size(); ++q)
      if (letters_[q] != 'I') s.push_back(q);
    return s;
  }
  int weight() const { return static_cast<int>(support().size()); }

  /// Letter pattern with identities removed, e.g. "IXIX" -> "XX".
  std::string family() const {
    std::string f;
    for (char c : letters_)
      if (c != 'I') f.push_back(c);
    return f;
  }

  std::uint64_t x_mask() const { return mask([](char c) { return c == 'X' || c == 'Y'; }); }
  std::uint64_t z_mask() const { return mask([](char c) { return c == 'Z' || c == 'Y'; }); }
  int y_count() const { return static_cast<int>(std::count(letters_.begin(), letters_.end(), 'Y')); }

 private:
  template <class Pred>
  std::uint64_t mask(Pred pred) const {
    std::uint64_t m = 0;
    const int n = size();
    for (int q = 0; q < n; ++q)
      if (pred(letters_[q])) m |= std::uint64_t{1} << bit_of(q, n);
    return m;
  }

  std::string letters_;
  Real coefficient_;
};

/// True when the two strings commute (even number of anticommuting sites).
inline bool commutes(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) throw std::invalid_argument("commutes: length mismatch");
  int anti = 0;
  for (int q = 0; q < a.size(); ++q)
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) ++anti;
  return anti % 2 == 0;
}

/// Hamiltonian as a sum of Pauli strings with unique letter sequences.
class PauliSum {
 public:
  explicit PauliSum(int n) : n_(n) {
    if (n < 1 || n > 63) throw std::invalid_argument("PauliSum: qubit count must be in [1, 63]");
  }

  int num_qubits() const { return n_; }
  const std::vector<PauliString>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds a term, merging coefficients with an existing identical letter sequence.
  PauliSum& add(const std::string& letters, Real coefficient) {
    if (static_cast<int>(letters.size()) != n_) {
      throw std::invalid_argument("PauliSum: term '" + letters + "' has length " +
                                  std::to_string(letters.size()) + ", expected " + std::to_string(n_));
    }
    if (auto it = index_.find(letters); it != index_.end()) {
      auto& t = terms_[it->second];
      t = PauliString(t.letters(), t.coefficient() + coefficient);
    } else {
      index_.emplace(letters, terms_.size());
      terms_.emplace_back(letters, coefficient);
    }
    return *this;
  }
  PauliSum& add(const PauliString& p) { return add(p.letters(), p.coefficient()); }

  PauliSum& operator+=(const PauliSum& other) {
    if (other.n_ != n_) throw std::invalid_argument("PauliSum: qubit count mismatch");
    for (const auto& t : other.terms_) add(t);
    return *this;
  }
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }

  PauliSum scaled(Real factor) const {
    PauliSum out(n_);
    for (const auto& t : terms_) out.add(t.letters(), factor * t.coefficient());
    return out;
  }

  int max_weight() const {
    int w = 0;
    for (const auto& t : terms_) w = std::max(w, t.weight());
    return w;
  }

  /// Sum of |coefficient|; an upper bound on the operator norm.
  Real one_norm() const {
    Real s = 0;
    for (const auto& t : terms_) s += std::abs(t.coefficient());
    return s;
  }

  /// out = H * in, matrix-free. Works for any n that fits in memory.
  void apply(const CVector& in, CVector& out) const {
    const auto dim = static_cast<Eigen::Index>(dim_of(n_));
    if (in.size() != dim) throw std::invalid_argument("PauliSum::apply: vector size mismatch");
    out.setZero(dim);
    static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (const auto& t : terms_) {
      const std::uint64_t x = t.x_mask();
      const std::uint64_t z = t.z_mask();
      const Complex c = t.coefficient() * kIPow[t.y_count() % 4];
      for (Eigen::Index b = 0; b < dim; ++b) {
        const auto ub = static_cast<std::uint64_t>(b);
        const Complex v = (std::popcount(ub & z) & 1) ? -in[b] : in[b];
        out[static_cast<Eigen::Index>(ub ^ x)] += c * v;
      }
    }
  }
  CVector apply(const CVector& in) const {
    CVector out;
    apply(in, out);
    return out;
  }

 private:
  int n_;
  std::vector<PauliString> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parses the one-term-per-line text format `<coeff> <letters>`; '#' starts a comment.
inline PauliSum parse_pauli_sum(std::istream& in) {
  std::vector<std::pair<Real, std::string>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string coeff_tok, letters, extra;
    if (!(ls >> coeff_tok)) continue;
    if (!(ls >> letters) || (ls >> extra)) {
      throw ParseError("pauli line " + std::to_string(lineno) + ": expected '<coeff> <letters>'");
    }
    Real c = 0;
    try {
      std::size_t used = 0;
      c = std::stod(coeff_tok, &used);
      if (used != coeff_tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("pauli line " + std::to_string(lineno) + ": bad coefficient '" + coeff_tok + "'");
    }
    if (letters.find_first_not_of("IXYZ") != std::string::npos) {
      throw ParseError("pauli line " + std::to_string(lineno) + ": letters outside {I,X,Y,Z}");
    }
    if (!rows.empty() && letters.size() != rows.front().second.size()) {
      throw ParseError("pauli line " + std::to_string(lineno) + ": inconsistent term length");
    }
    rows.emplace_back(c, std::move(letters));
  }
  if (rows.empty()) throw ParseError("pauli file contains no terms");
  PauliSum h(static_cast<int>(rows.front().second.size()));
  for (auto& [c, l] : rows) h.add(l, c);
  return h;
}

inline PauliSum parse_pauli_sum(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_pauli_sum(in);
}

inline void write_pauli_sum(std::ostream& out, const PauliSum& h) {
  const auto old = out.precision(17);
  for (const auto& t : h.terms()) out << t.coefficient() << ' ' << t.letters() << '\n';
  out.precision(old);
}

}  // namespace dbqite
