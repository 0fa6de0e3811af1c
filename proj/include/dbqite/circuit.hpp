#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dbqite/core.hpp"
#include "dbqite/pauli.hpp"

namespace dbqite {

enum class GateKind : std::uint8_t { H, S, Sdg, T, Tdg, X, RZ, U3, CX, CCX, PHASE, EXPH };

inline std::string_view gate_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "SDG";
    case GateKind::T: return "T";
    case GateKind::Tdg: return "TDG";
    case GateKind::X: return "X";
    case GateKind::RZ: return "RZ";
    case GateKind::U3: return "U3";
    case GateKind::CX: return "CX";
    case GateKind::CCX: return "CCX";
    case GateKind::PHASE: return "PHASE";
    case GateKind::EXPH: return "EXPH";
  }
  return "?";
}

inline GateKind parse_gate_kind(std::string_view s) {
  static const std::pair<std::string_view, GateKind> table[] = {
      {"H", GateKind::H},     {"S", GateKind::S},     {"SDG", GateKind::Sdg},     {"T", GateKind::T},
      {"TDG", GateKind::Tdg}, {"X", GateKind::X},     {"RZ", GateKind::RZ},       {"U3", GateKind::U3},
      {"CX", GateKind::CX},   {"CCX", GateKind::CCX}, {"PHASE", GateKind::PHASE}, {"EXPH", GateKind::EXPH}};
  for (const auto& [name, kind] : table)
    if (name == s) return kind;
  throw ParseError("unknown gate '" + std::string(s) + "'");
}

/// Fixed qubit arity per kind; EXPH spans all data qubits and reports 0 here.
inline int gate_arity(GateKind k) {
  switch (k) {
    case GateKind::CX: return 2;
    case GateKind::CCX: return 3;
    case GateKind::EXPH: return 0;
    default: return 1;
  }
}

inline int gate_param_count(GateKind k) {
  switch (k) {
    case GateKind::RZ:
    case GateKind::PHASE:
    case GateKind::EXPH: return 1;
    case GateKind::U3: return 3;
    default: return 0;
  }
}

/// One primitive gate. Conventions: RZ(a) = diag(e^{-ia/2}, e^{ia/2}),
/// PHASE(a) = diag(1, e^{ia}), U3(t,p,l) = [[cos t/2, -e^{il} sin t/2], [e^{ip} sin t/2, e^{i(p+l)} cos t/2]],
/// EXPH(a) = e^{i a H} on the data register for the circuit's Hamiltonian.
struct Gate {
  GateKind kind{};
  std::array<int, 3> qubits{};
  std::array<Real, 3> params{};

  int arity() const { return gate_arity(kind); }
  std::span<const int> operands() const { return {qubits.data(), static_cast<std::size_t>(arity())}; }
  bool single_qubit() const { return arity() == 1; }

  static Gate one(GateKind k, int q, Real a = 0) { return Gate{k, {q, 0, 0}, {a, 0, 0}}; }
  static Gate u3(int q, Real theta, Real phi, Real lambda) { return Gate{GateKind::U3, {q, 0, 0}, {theta, phi, lambda}}; }
  static Gate cx(int c, int t) { return Gate{GateKind::CX, {c, t, 0}, {}}; }
  static Gate ccx(int c1, int c2, int t) { return Gate{GateKind::CCX, {c1, c2, t}, {}}; }
  static Gate exph(Real a) { return Gate{GateKind::EXPH, {}, {a, 0, 0}}; }

  Gate inverse() const {
    Gate g = *this;
    switch (kind) {
      case GateKind::S: g.kind = GateKind::Sdg; break;
      case GateKind::Sdg: g.kind = GateKind::S; break;
      case GateKind::T: g.kind = GateKind::Tdg; break;
      case GateKind::Tdg: g.kind = GateKind::T; break;
      case GateKind::RZ:
      case GateKind::PHASE:
      case GateKind::EXPH: g.params[0] = -params[0]; break;
      case GateKind::U3: g.params = {-params[0], -params[2], -params[1]}; break;
      default: break;
    }
    return g;
  }
};

class Circuit;

/// Invocation of a shared sub-circuit on the same qubit indices, optionally inverted.
struct Call {
  std::shared_ptr<const Circuit> body;
  bool inverse = false;
};

using Op = std::variant<Gate, Call>;

/// Ordered gate list over `width` qubits: data qubits 0..data-1 followed by ancillas.
/// Sub-circuits are referenced, not copied, so deep recursive syntheses stay compact.
class Circuit {
 public:
  Circuit(int width, int data) : width_(width), data_(data) {
    if (data < 1 || width < data) throw std::invalid_argument("Circuit: need 1 <= data <= width");
    if (width > 63) throw CapacityError("Circuit: width too large");
  }

  int width() const { return width_; }
  int data_qubits() const { return data_; }
  int ancilla_qubits() const { return width_ - data_; }
  const std::vector<Op>& ops() const { return ops_; }
  bool empty() const { return ops_.empty(); }

  /// Number of U0 queries contained in this circuit (1 for a marked preparation circuit).
  std::int64_t u0_queries() const { return u0_queries_; }
  void set_u0_queries(std::int64_t q) { u0_queries_ = q; }

  const std::shared_ptr<const PauliSum>& hamiltonian() const { return hamiltonian_; }
  void set_hamiltonian(std::shared_ptr<const PauliSum> h) {
    if (h && h->num_qubits() != data_) throw std::invalid_argument("Circuit: Hamiltonian width != data qubits");
    hamiltonian_ = std::move(h);
  }

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  Circuit& add(const Gate& g) {
    if (g.kind == GateKind::EXPH) {
      if (!hamiltonian_) throw ContractViolation("Circuit: EXPH gate requires a Hamiltonian");
    } else {
      const auto ops = g.operands();
      for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i] < 0 || ops[i] >= width_) {
          throw std::out_of_range("Circuit: gate " + std::string(gate_name(g.kind)) + " operand " +
                                  std::to_string(ops[i]) + " outside width " + std::to_string(width_));
        }
        for (std::size_t j = 0; j < i; ++j)
          if (ops[i] == ops[j]) throw std::invalid_argument("Circuit: repeated gate operand");
      }
    }
    ops_.emplace_back(g);
    return *this;
  }

  Circuit& call(std::shared_ptr<const Circuit> body, bool inverse = false) {
    if (!body) throw std::invalid_argument("Circuit: null sub-circuit");
    if (body->width_ > width_ || body->data_ != data_) {
      throw std::invalid_argument("Circuit: sub-circuit register does not fit");
    }
    if (body->hamiltonian_ && !hamiltonian_) hamiltonian_ = body->hamiltonian_;
    u0_queries_ += body->u0_queries_;
    ops_.emplace_back(Call{std::move(body), inverse});
    return *this;
  }

  /// Appends all ops of another circuit inline.
  Circuit& append(const Circuit& other) {
    if (other.width_ > width_ || other.data_ != data_) throw std::invalid_argument("Circuit: append width mismatch");
    if (other.hamiltonian_ && !hamiltonian_) hamiltonian_ = other.hamiltonian_;
    for (const auto& op : other.ops_) ops_.push_back(op);
    u0_queries_ += other.u0_queries_;
    return *this;
  }

  /// Visits primitive gates in execution order, expanding calls (and their inverses).
  template <class F>
  void for_each_gate(F&& f, bool inverse = false) const {
    if (!inverse) {
      for (const auto& op : ops_) visit_op(op, f, false);
    } else {
      for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) visit_op(*it, f, true);
    }
  }

  std::int64_t gate_count() const {
    std::int64_t n = 0;
    for (const auto& op : ops_) {
      if (std::holds_alternative<Gate>(op)) {
        ++n;
      } else {
        n += std::get<Call>(op).body->gate_count();
      }
    }
    return n;
  }

  /// Flat copy with every call expanded.
  Circuit flattened() const {
    Circuit out(width_, data_);
    out.hamiltonian_ = hamiltonian_;
    out.metadata_ = metadata_;
    out.u0_queries_ = u0_queries_;
    for_each_gate([&](const Gate& g) { out.ops_.emplace_back(g); });
    return out;
  }

 private:
  template <class F>
  static void visit_op(const Op& op, F& f, bool inverse) {
    if (const auto* g = std::get_if<Gate>(&op)) {
      f(inverse ? g->inverse() : *g);
    } else {
      const auto& c = std::get<Call>(op);
      c.body->for_each_gate(f, inverse != c.inverse);
    }
  }

  int width_;
  int data_;
  std::vector<Op> ops_;
  std::int64_t u0_queries_ = 0;
  std::shared_ptr<const PauliSum> hamiltonian_;
  std::map<std::string, std::string> metadata_;
};

/// Formal inverse: reversed op order with each gate and call inverted.
inline Circuit inverse(const Circuit& c) {
  Circuit out(c.width(), c.data_qubits());
  out.set_hamiltonian(c.hamiltonian());
  for (auto it = c.ops().rbegin(); it != c.ops().rend(); ++it) {
    if (const auto* g = std::get_if<Gate>(&*it)) {
      out.add(g->inverse());
    } else {
      const auto& call = std::get<Call>(*it);
      out.call(call.body, !call.inverse);
    }
  }
  out.set_u0_queries(c.u0_queries());
  return out;
}

/// Writes the flat text format: `width=`, `data=`, `u0_queries=` and optional `exph <coeff> <letters>`
/// header lines, then one gate per line `GATE q0 [q1 ...] [angles]`.
inline void write_circuit(std::ostream& out, const Circuit& c) {
  const auto old = out.precision(17);
  out << "width=" << c.width() << '\n' << "data=" << c.data_qubits() << '\n';
  out << "u0_queries=" << c.u0_queries() << '\n';
  for (const auto& [k, v] : c.metadata()) out << "# " << k << '=' << v << '\n';
  if (c.hamiltonian()) {
    for (const auto& t : c.hamiltonian()->terms()) out << "exph " << t.coefficient() << ' ' << t.letters() << '\n';
  }
  c.for_each_gate([&](const Gate& g) {
    out << gate_name(g.kind);
    if (g.kind == GateKind::EXPH) {
      for (int q = 0; q < c.data_qubits(); ++q) out << ' ' << q;
    } else {
      for (int q : g.operands()) out << ' ' << q;
    }
    for (int i = 0; i < gate_param_count(g.kind); ++i) out << ' ' << g.params[static_cast<std::size_t>(i)];
    out << '\n';
  });
  out.precision(old);
}

inline Circuit read_circuit(std::istream& in) {
  int width = -1, data = -1;
  std::int64_t queries = 0;
  std::vector<std::pair<Real, std::string>> exph_terms;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<int, std::string>> gate_lines;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.rfind("# ", 0) == 0) {
      if (auto eq = line.find('='); eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (line[0] == '#') continue;
    try {
      if (line.rfind("width=", 0) == 0) {
        width = std::stoi(line.substr(6));
      } else if (line.rfind("data=", 0) == 0) {
        data = std::stoi(line.substr(5));
      } else if (line.rfind("u0_queries=", 0) == 0) {
        queries = std::stoll(line.substr(11));
      } else if (line.rfind("exph ", 0) == 0) {
        std::istringstream ls(line.substr(5));
        Real c = 0;
        std::string letters;
        if (!(ls >> c >> letters)) throw ParseError("bad exph line");
        exph_terms.emplace_back(c, letters);
      } else {
        gate_lines.emplace_back(lineno, line);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("circuit line " + std::to_string(lineno) + ": bad header '" + line + "'");
    }
  }
  if (width < 1 || data < 1) throw ParseError("circuit: missing width=/data= header");
  Circuit c(width, data);
  c.metadata() = meta;
  if (!exph_terms.empty()) {
    PauliSum h(static_cast<int>(exph_terms.front().second.size()));
    for (const auto& [coef, l] : exph_terms) h.add(l, coef);
    c.set_hamiltonian(std::make_shared<const PauliSum>(std::move(h)));
  }
  for (const auto& [no, text] : gate_lines) {
    std::istringstream ls(text);
    std::string name;
    ls >> name;
    Gate g;
    g.kind = parse_gate_kind(name);
    const int arity = g.kind == GateKind::EXPH ? data : g.arity();
    for (int i = 0; i < arity; ++i) {
      int q = 0;
      if (!(ls >> q)) throw ParseError("circuit line " + std::to_string(no) + ": missing qubit operand");
      if (g.kind == GateKind::EXPH) {
        if (q != i) throw ParseError("circuit line " + std::to_string(no) + ": EXPH must act on data qubits in order");
      } else {
        g.qubits[static_cast<std::size_t>(i)] = q;
      }
    }
    for (int i = 0; i < gate_param_count(g.kind); ++i) {
      if (!(ls >> g.params[static_cast<std::size_t>(i)])) {
        throw ParseError("circuit line " + std::to_string(no) + ": missing angle");
      }
    }
    std::string extra;
    if (ls >> extra) throw ParseError("circuit line " + std::to_string(no) + ": trailing tokens");
    c.add(g);
  }
  c.set_u0_queries(queries);
  return c;
}

}  // namespace dbqite
