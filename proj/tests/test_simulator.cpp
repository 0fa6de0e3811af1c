#include <gtest/gtest.h>

#include <random>

#include "dbqite/models.hpp"
#include "dbqite/simulator.hpp"
#include "oracles.hpp"

using namespace dbqite;

namespace {

oracle::Mat embed(const oracle::Mat& g, int q, int width) {
  oracle::Mat m = oracle::Mat::Identity(1, 1);
  for (int i = 0; i < width; ++i) m = oracle::kron(m, i == q ? g : oracle::pauli('I'));
  return m;
}

}  // namespace

TEST(Simulator, SingleQubitGatesMatchKronecker) {
  std::mt19937_64 rng(6);
  for (const Gate g : {Gate::one(GateKind::H, 1), Gate::one(GateKind::Sdg, 0), Gate::one(GateKind::Tdg, 2),
                       Gate::one(GateKind::X, 2), Gate::one(GateKind::RZ, 1, 0.8), Gate::u3(0, 1.1, -0.3, 2.2)}) {
    Circuit c(3, 3);
    c.add(g);
    const auto ref = embed(gate_matrix(g), g.qubits[0], 3);
    EXPECT_LT((circuit_unitary(c).matrix() - ref).norm(), 1e-14) << gate_name(g.kind);
  }
}

TEST(Simulator, ControlledGatesPermuteBasis) {
  Circuit c(3, 3);
  c.add(Gate::cx(0, 2));
  // |100> -> |101>: qubit 0 is the most significant bit
  const auto u = circuit_unitary(c);
  EXPECT_EQ(u(0b101, 0b100), Complex(1.0));
  EXPECT_EQ(u(0b011, 0b011), Complex(1.0));
  Circuit t(3, 3);
  t.add(Gate::ccx(0, 1, 2));
  const auto v = circuit_unitary(t);
  EXPECT_EQ(v(0b111, 0b110), Complex(1.0));
  EXPECT_EQ(v(0b101, 0b101), Complex(1.0));
}

TEST(Simulator, ExphSlicesOverAncillas) {
  const PauliSum h = build_heisenberg({3, 1.0, 0.5, Boundary::open});
  Circuit c(4, 3);
  c.set_hamiltonian(std::make_shared<const PauliSum>(h));
  c.add(Gate::exph(0.4));
  std::vector<oracle::Term> terms;
  for (const auto& t : h.terms()) terms.push_back({t.coefficient(), t.letters()});
  const auto ref = oracle::kron(oracle::expm(std::complex<double>(0, 0.4) * oracle::dense(terms)), oracle::pauli('I'));
  EXPECT_LT((circuit_unitary(c).matrix() - ref).norm(), 1e-12);
}

TEST(Simulator, AncillaResidualContract) {
  Circuit c(2, 1);
  c.add(Gate::one(GateKind::H, 1));
  EXPECT_THROW(run_circuit(c, StateVector::basis(1, 0)), ContractViolation);
  Circuit ok(2, 1);
  ok.add(Gate::one(GateKind::H, 1)).add(Gate::one(GateKind::H, 1));
  EXPECT_LT(run_circuit(ok, StateVector::basis(1, 1)).ancilla_residual, 1e-15);
  EXPECT_THROW(run_circuit(ok, StateVector::basis(2, 0)), std::invalid_argument);
}

TEST(Simulator, CapacityGuards) {
  EXPECT_THROW(StatevectorSimulator(27), CapacityError);
  EXPECT_THROW(circuit_unitary(Circuit(13, 13)), CapacityError);
}

TEST(Simulator, PreservesNormOverLongCircuit) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  Circuit c(5, 5);
  for (int i = 0; i < 2000; ++i) {
    const int q = static_cast<int>(rng() % 5);
    c.add(Gate::u3(q, u(rng), u(rng), u(rng)));
    c.add(Gate::cx(q, (q + 1 + static_cast<int>(rng() % 4)) % 5));
  }
  const auto out = run_circuit(c, StateVector(5, oracle::random_state(rng, 32)));
  EXPECT_NEAR(out.final_state.amplitudes().norm(), 1.0, 1e-12);
}
