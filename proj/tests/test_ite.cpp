#include <gtest/gtest.h>

#include <random>

#include "dbqite/ite.hpp"
#include "dbqite/models.hpp"
#include "oracles.hpp"

using namespace dbqite;

namespace {

PauliSum random_sum(std::mt19937_64& rng, int n, int terms) {
  std::uniform_real_distribution<double> u(-1, 1);
  const std::string letters = "IXYZ";
  PauliSum h(n);
  for (int t = 0; t < terms; ++t) {
    std::string s;
    for (int q = 0; q < n; ++q) s += letters[rng() % 4];
    h.add(s, u(rng));
  }
  return h;
}

}  // namespace

TEST(Energy, MatchesDenseExpectation) {
  std::mt19937_64 rng(4);
  const PauliSum h = random_sum(rng, 3, 8);
  const StateVector psi(3, oracle::random_state(rng, 8));
  const CMatrix hd = to_dense(h).matrix();
  const double e = oracle::expectation(hd, psi.amplitudes());
  EXPECT_NEAR(energy(psi, h), e, 1e-12);
  const CMatrix h2 = oracle::matmul(hd, hd);
  EXPECT_NEAR(variance(psi, h), oracle::expectation(h2, psi.amplitudes()) - e * e, 1e-11);
}

TEST(Energy, EigenstateVarianceIsNonNegative) {
  const PauliSum h = build_heisenberg({6, 1.0, 0.5, Boundary::open});
  const auto es = eigh(to_dense(h));
  for (int k = 0; k < 8; ++k) {
    const double v = variance(es.state(k), h);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1e-20);
  }
}

TEST(ImaginaryTime, MatchesTaylorOracle) {
  std::mt19937_64 rng(8);
  const PauliSum h = random_sum(rng, 3, 10);
  const StateVector psi(3, oracle::random_state(rng, 8));
  const ImaginaryTimeEvolver ite(h);
  for (double tau : {0.0, 0.05, 0.5, 2.0}) {
    const auto ref = oracle::normalize(oracle::matvec(oracle::expm(-tau * to_dense(h).matrix()), psi.amplitudes()));
    EXPECT_NEAR(fidelity(ite.evolve(psi, tau), StateVector(3, ref)), 1.0, 1e-12) << tau;
  }
  EXPECT_THROW(ite.evolve(psi, -0.1), std::invalid_argument);
}

TEST(ImaginaryTime, LongTimesDoNotUnderflow) {
  const PauliSum h = build_heisenberg({6, 1.0, 0.5, Boundary::open});
  const ImaginaryTimeEvolver ite(h);
  const auto psi = StateVector::basis(6, 0b010101);
  const auto out = ite.evolve(psi, 1e4);
  EXPECT_NEAR(out.amplitudes().norm(), 1.0, 1e-14);
  // Within the sector reachable from psi, the lowest eigenstate with nonzero overlap dominates.
  EXPECT_NEAR(variance(out, h), 0.0, 1e-9);
}

TEST(ImaginaryTime, EnergyDecreasesAlongTrajectory) {
  const PauliSum h = build_heisenberg({6, 1.0, 0.5, Boundary::open});
  const ImaginaryTimeEvolver ite(h);
  const auto traj = ite_trajectory(ite, h, singlet_state(6), linear_grid(0, 5, 51), {0, 1});
  for (std::size_t i = 1; i < traj.energies.size(); ++i) {
    // strict while the state is still far from stationary, then flat to round-off
    if (traj.variances[i - 1] > 1e-6) {
      EXPECT_LT(traj.energies[i], traj.energies[i - 1]);
    } else {
      EXPECT_LE(traj.energies[i], traj.energies[i - 1] + 1e-12);
    }
  }
  EXPECT_EQ(traj.fidelities.front().size(), 2u);
  for (double v : traj.variances) EXPECT_GE(v, 0.0);
}

TEST(ImaginaryTime, EigenstateIsFixedPoint) {
  // Ground-state exclusion: evolving a state orthogonal to the ground state never reaches it.
  const PauliSum h = build_heisenberg({4, 1.0, 0.5, Boundary::open});
  const auto es = eigh(to_dense(h));
  const ImaginaryTimeEvolver ite(h);
  const auto out = ite.evolve(es.state(3), 50.0);
  EXPECT_NEAR(fidelity(out, es.state(3)), 1.0, 1e-12);
}

TEST(DoubleBracketFlow, ResidualVanishesForIte) {
  // Normalized ITE solves dPsi/dtau = [[Psi, H], Psi].
  const PauliSum h = build_heisenberg({4, 1.0, 0.5, Boundary::open});
  const ImaginaryTimeEvolver ite(h);
  const auto psi0 = singlet_state(4);
  const auto f = [&](Real t) { return ite.evolve(psi0, t); };
  for (double tau : {0.1, 0.5, 1.5}) EXPECT_LT(dbf_residual(f, h, tau), 1e-6);
}

TEST(DoubleBracketFlow, LossRateIdentity) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5; ++t) {
    const auto a = DenseOperator(oracle::random_hermitian(rng, 4), true);
    const auto b = DenseOperator(oracle::random_hermitian(rng, 4), true);
    const auto r = loss_rate_check(a, b, 1e-3);
    EXPECT_LT(std::abs(r.lhs - r.rhs) / std::abs(r.rhs), 1e-6);
  }
}

TEST(DoubleBracketFlow, GradientIsMinusDoubleBracket) {
  std::mt19937_64 rng(17);
  const StateVector psi(2, oracle::random_state(rng, 4));
  const auto p = DenseOperator::projector(psi);
  const auto b = DenseOperator(oracle::random_hermitian(rng, 4), true);
  const auto g = riemannian_gradient(p, b);
  EXPECT_TRUE(g.is_hermitian());
  const CMatrix pb = oracle::matmul(p.matrix(), b.matrix()) - oracle::matmul(b.matrix(), p.matrix());
  const CMatrix ref = -(oracle::matmul(pb, p.matrix()) - oracle::matmul(p.matrix(), pb));
  EXPECT_LT((g.matrix() - ref).norm(), 1e-12);
}

TEST(CentralDifference, RichardsonIsFourthOrder) {
  const auto f = [](Real x) { return std::sin(3 * x); };
  const double exact = 3 * std::cos(3 * 0.4);
  EXPECT_LT(std::abs(central_difference(f, 0.4, 1e-2, true) - exact), 1e-8);
  EXPECT_GT(std::abs(central_difference(f, 0.4, 1e-2, false) - exact), 1e-5);
}
