#include <gtest/gtest.h>

#include <cmath>

#include "statevector_oracle.hpp"
#include "tnattack/fpeps.hpp"

using namespace tnattack;

namespace {

MatrixC random_unitary(int d, Rng& rng) {
  std::normal_distribution<double> g;
  MatrixC m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<MatrixC> qr(m);
  return qr.householderQ() * MatrixC::Identity(d, d);
}

void expect_invariants(const FlexNetState& s, const SimConfig& cfg) {
  for (const auto& [key, e] : s.edges()) {
    ASSERT_LT(key.first, key.second);
    EXPECT_NEAR(e.lambda.squaredNorm(), 1.0, 1e-10);
    for (Eigen::Index k = 0; k < e.lambda.size(); ++k) {
      EXPECT_GE(e.lambda[k], 0.0);
      if (k) {
        EXPECT_LE(e.lambda[k], e.lambda[k - 1]);
      }
    }
    EXPECT_EQ(s.vertex(key.first).dim(e.id), e.lambda.size());
    EXPECT_EQ(s.vertex(key.second).dim(e.id), e.lambda.size());
  }
  for (std::size_t q = 0; q < s.num_qubits(); ++q) {
    EXPECT_LE(s.degree(static_cast<int>(q)), cfg.kappa);
    EXPECT_EQ(s.vertex(static_cast<int>(q)).rank(), 1 + s.degree(static_cast<int>(q)));
  }
}

struct Mirrored {
  FlexNetState net;
  oracle::Vec psi;
  int n;
  Mirrored(int n_) : net(static_cast<std::size_t>(n_)), psi(oracle::zero_state(n_)), n(n_) {}
  void one(int q, const MatrixC& g) {
    apply_one_body(net, q, g);
    oracle::apply1(psi, n, q, g);
  }
  void two(int i, int j, const MatrixC& g, const SimConfig& cfg) {
    apply_two_body(net, i, j, g, cfg);
    oracle::apply2(psi, n, i, j, g);
  }
  double fidelity() const { return oracle::fidelity(to_statevector(net), psi); }
};

}  // namespace

TEST(Tensor, PermuteAndContract) {
  Tensor a({1, 2}, {2, 3});
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data[i] = double(i);
  const Tensor t = permute(a, {2, 1});
  EXPECT_EQ(t.dims, (std::vector<Eigen::Index>{3, 2}));
  EXPECT_EQ(t.data[1], cplx(3.0));  // t[0][1] = a[1][0]
  Tensor b({2, 5}, {3, 4});
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data[i] = double(i % 5);
  const Tensor c = contract(a, b);
  EXPECT_EQ(c.labels, (std::vector<int>{1, 5}));
  const auto ma = matricize(a, {1});
  const auto mb = matricize(b, {2});
  EXPECT_LT((matricize(c, {1}) - ma * mb).norm(), 1e-12);
  EXPECT_THROW(a.axis(9), NotFoundError);
}

TEST(Tensor, SliceScaleModeProduct) {
  Tensor a({7, 8, 9}, {2, 3, 2});
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data[i] = double(i);
  const Tensor s = slice_axis(a, 8, 2);
  EXPECT_EQ(s.dims, (std::vector<Eigen::Index>{2, 2}));
  EXPECT_EQ(s.data[0], cplx(4.0));
  EXPECT_EQ(s.data[3], cplx(11.0));
  VectorR w(3);
  w << 1, 0, 2;
  Tensor b = a;
  scale_axis(b, 8, w);
  EXPECT_EQ(b.data[2], cplx(0.0));
  EXPECT_EQ(b.data[5], cplx(10.0));
  const Tensor m = mode_product(a, 8, MatrixC::Identity(3, 3));
  EXPECT_LT((m.data - a.data).norm(), 1e-15);
}

TEST(Fpeps, ProductInit) {
  const auto one = init_product(1);
  EXPECT_EQ(one.vertex(0).data, (VectorC(2) << 1, 0).finished());
  const auto ten = init_product(10);
  EXPECT_TRUE(ten.edges().empty());
  EXPECT_NEAR(std::abs(to_statevector(init_product(5))[0]), 1.0, 1e-15);
  EXPECT_THROW(init_product(0), ShapeError);
}

TEST(Fpeps, OneBodyGates) {
  auto s = init_product(1);
  apply_one_body(s, 0, gates::pauli('X'));
  EXPECT_NEAR(std::abs(to_statevector(s)[1]), 1.0, 1e-15);
  apply_one_body(s, 0, gates::pauli('X'));
  EXPECT_NEAR(std::abs(to_statevector(s)[0]), 1.0, 1e-15);
  auto h = init_product(1);
  apply_one_body(h, 0, gates::hadamard());
  const VectorC v = to_statevector(h);
  EXPECT_NEAR(std::abs(v[0] - 1 / std::sqrt(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(v[1] - 1 / std::sqrt(2.0)), 0.0, 1e-12);
  EXPECT_THROW(apply_one_body(h, 0, 2.0 * gates::pauli('X')), InvalidGateError);
  EXPECT_THROW(apply_one_body(h, 3, gates::pauli('X')), NotFoundError);
}

TEST(Fpeps, CnotOnZeroStaysProduct) {
  SimConfig cfg;
  auto s = init_product(2);
  apply_two_body(s, 0, 1, gates::cnot(), cfg);
  ASSERT_TRUE(s.has_edge(0, 1));
  EXPECT_EQ(s.edge(0, 1).lambda.size(), 1);
  EXPECT_NEAR(s.edge(0, 1).lambda[0], 1.0, 1e-12);
  EXPECT_NEAR(bond_entropy(s, 0, 1), 0.0, 1e-12);
}

TEST(Fpeps, BellPair) {
  SimConfig cfg;
  auto s = init_product(2);
  apply_one_body(s, 0, gates::hadamard());
  apply_two_body(s, 0, 1, gates::cnot(), cfg);
  const VectorR& l = s.edge(0, 1).lambda;
  ASSERT_EQ(l.size(), 2);
  EXPECT_NEAR(l[0], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(l[1], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(bond_entropy(s, 0, 1), std::log(2.0), 1e-12);
  for (int q : {0, 1}) {
    const MatrixC rho = reduced_density_matrix(s, q);
    EXPECT_LT((rho - MatrixC::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Fpeps, BondEntropyValues) {
  EXPECT_EQ(bond_entropy(VectorR::Ones(1)), 0.0);
  VectorR a(2), b(2);
  a << std::sqrt(0.5), std::sqrt(0.5);
  b << std::sqrt(0.9), std::sqrt(0.1);
  EXPECT_NEAR(bond_entropy(a), 0.6931471805599453, 1e-12);
  EXPECT_NEAR(bond_entropy(b), 0.3250829733914482, 1e-12);
  EXPECT_THROW(bond_entropy(init_product(2), 0, 1), NotFoundError);
}

TEST(Fpeps, ChiOneIsBestRankOneCut) {
  Rng rng(5);
  SimConfig cfg;
  cfg.chi = 1;
  for (int t = 0; t < 20; ++t) {
    Mirrored m(2);
    m.one(0, random_unitary(2, rng));
    m.one(1, random_unitary(2, rng));
    const MatrixC u = random_unitary(4, rng);
    m.two(0, 1, u, cfg);
    // Leading squared Schmidt coefficient of the exact state.
    Eigen::Matrix2cd cut;
    cut << m.psi[0], m.psi[1], m.psi[2], m.psi[3];
    const double top = Eigen::JacobiSVD<Eigen::Matrix2cd>(cut).singularValues()[0];
    EXPECT_NEAR(m.fidelity(), top * top, 1e-10);
  }
}

TEST(Fpeps, TruncationMonotone) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<GateRecord> circuit;
    std::uniform_int_distribution<int> pick(0, 4);
    for (int g = 0; g < 12; ++g) {
      const int i = pick(rng);
      int j = pick(rng);
      if (j == i) j = (i + 1) % 5;
      const MatrixC u = random_unitary(4, rng);
      circuit.push_back({"unitary", {i, j}, {}, std::vector<cplx>(u.data(), u.data() + 16)});
    }
    // Row-major storage for the record.
    for (auto& g : circuit) {
      Eigen::Map<Eigen::Matrix<cplx, 4, 4>> colmajor(g.matrix.data());
      const Eigen::Matrix<cplx, 4, 4> m = colmajor;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g.matrix[static_cast<std::size_t>(r * 4 + c)] = m(r, c);
    }
    oracle::Vec exact = oracle::zero_state(5);
    for (const auto& g : circuit) oracle::apply2(exact, 5, g.qubits[0], g.qubits[1], gate_matrix(g));
    double previous = 1.0 + 1e-9;
    for (std::size_t chi : {32, 4, 2, 1}) {
      SimConfig cfg;
      cfg.chi = chi;
      cfg.kappa = 4;
      // Single-gate truncation on the same pre-state.
      FlexNetState s(5);
      for (std::size_t k = 0; k + 1 < circuit.size(); ++k) apply_gate(s, circuit[k], SimConfig{32, 4, 1e-12, 0});
      FlexNetState before = s;
      apply_gate(before, circuit.back(), SimConfig{32, 4, 1e-12, 0});
      apply_gate(s, circuit.back(), cfg);
      const double f = oracle::fidelity(to_statevector(s), to_statevector(before));
      EXPECT_LE(f, previous + 1e-10) << "chi " << chi;
      previous = f;
    }
  }
}

TEST(Fpeps, RankOneDeletionIsExact) {
  SimConfig cfg;
  cfg.kappa = 2;
  Rng rng(7);
  Mirrored m(4);
  m.one(0, gates::hadamard());
  m.two(0, 1, gates::cnot(), cfg);
  m.two(0, 2, gates::cnot(), cfg);
  m.two(0, 3, gates::cz(), cfg);  // qubit 3 is |0>: rank-1 edge
  // Degree of 0 reached 3 > kappa; the rank-1 edge (0,3) must be gone.
  EXPECT_FALSE(m.net.has_edge(0, 3));
  EXPECT_TRUE(m.net.has_edge(0, 1));
  EXPECT_TRUE(m.net.has_edge(0, 2));
  EXPECT_NEAR(m.fidelity(), 1.0, 1e-10);
  expect_invariants(m.net, cfg);
}

TEST(Fpeps, DegreeCapTieBreak) {
  SimConfig cfg;
  cfg.kappa = 3;
  auto s = init_product(5);
  for (int j : {1, 2, 3}) apply_two_body(s, 0, j, gates::cnot(), cfg);
  cfg.kappa = 2;
  enforce_degree_cap(s, 0, cfg);
  EXPECT_FALSE(s.has_edge(0, 1));
  EXPECT_TRUE(s.has_edge(0, 2));
  EXPECT_TRUE(s.has_edge(0, 3));
}

TEST(Fpeps, ForcedBellDeletion) {
  SimConfig cfg;
  Mirrored m(2);
  m.one(0, gates::hadamard());
  m.two(0, 1, gates::cnot(), cfg);
  delete_edge(m.net, 0, 1);
  EXPECT_TRUE(m.net.edges().empty());
  EXPECT_NEAR(m.fidelity(), 0.5, 1e-12);
}

TEST(Fpeps, DensityMatrices) {
  auto s = init_product(3);
  apply_one_body(s, 1, gates::pauli('X'));
  const MatrixC rho = reduced_density_matrix(s, 1);
  EXPECT_NEAR(std::abs(rho(1, 1) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(rho(0, 0)), 0.0, 1e-12);
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    auto r = init_product(2);
    const MatrixC u = random_unitary(2, rng);
    apply_one_body(r, 0, u);
    const VectorC v = u.col(0);
    EXPECT_LT((reduced_density_matrix(r, 0) - v * v.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Fpeps, DensityMatricesMatchOracleOnTrees) {
  Rng rng(9);
  SimConfig cfg;
  cfg.chi = 64;
  cfg.kappa = 5;
  for (int t = 0; t < 10; ++t) {
    Mirrored m(6);
    for (int q = 0; q < 6; ++q) m.one(q, random_unitary(2, rng));
    // Random tree: every qubit links to an earlier one.
    for (int q = 1; q < 6; ++q) {
      std::uniform_int_distribution<int> parent(0, q - 1);
      m.two(parent(rng), q, random_unitary(4, rng), cfg);
    }
    for (int q = 0; q < 6; ++q) {
      oracle::Mat exact = oracle::Mat::Zero(2, 2);
      const Eigen::Index bit = Eigen::Index{1} << (5 - q);
      for (Eigen::Index x = 0; x < 64; ++x)
        for (int b = 0; b < 2; ++b) {
          const Eigen::Index y = b ? (x | bit) : (x & ~bit);
          exact((x & bit) ? 1 : 0, b) += m.psi[x] * std::conj(m.psi[y]);
        }
      const MatrixC rho = reduced_density_matrix(m.net, q);
      EXPECT_LT((rho - exact).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-12);
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixC>(rho).eigenvalues().minCoeff(), -1e-9);
    }
    EXPECT_NEAR(m.fidelity(), 1.0, 1e-10);
  }
}

TEST(Fpeps, SamplingProductAndBell) {
  Rng rng(10);
  auto p = init_product(3);
  apply_one_body(p, 0, gates::pauli('X'));
  apply_one_body(p, 2, gates::pauli('X'));
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_bitstring(p, rng), BitString::parse("101"));

  SimConfig cfg;
  auto bell = init_product(2);
  apply_one_body(bell, 0, gates::hadamard());
  apply_two_body(bell, 0, 1, gates::cnot(), cfg);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto b = sample_bitstring(bell, rng);
    ASSERT_EQ(b[0], b[1]);
    zeros += b[0] == 0;
  }
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.05);
}

TEST(Fpeps, SamplingGhzChiSquare) {
  Rng rng(11);
  SimConfig cfg;
  cfg.chi = 2;
  cfg.kappa = 2;
  auto g = init_product(3);
  apply_one_body(g, 0, gates::hadamard());
  apply_two_body(g, 0, 1, gates::cnot(), cfg);
  apply_two_body(g, 1, 2, gates::cnot(), cfg);
  std::array<int, 8> counts{};
  for (int i = 0; i < 10000; ++i) ++counts[sample_bitstring(g, rng).to_uint()];
  EXPECT_EQ(counts[0] + counts[7], 10000);
  EXPECT_NEAR(counts[0] / 10000.0, 0.5, 0.05);
  const double chi2 = 2 * std::pow(counts[0] - 5000.0, 2) / 5000.0;
  EXPECT_LT(chi2, 6.635);
}

TEST(Fpeps, SamplingMatchesBornOnTrees) {
  Rng rng(12);
  SimConfig cfg;
  Mirrored m(4);
  for (int q = 0; q < 4; ++q) m.one(q, random_unitary(2, rng));
  m.two(0, 1, random_unitary(4, rng), cfg);
  m.two(1, 2, random_unitary(4, rng), cfg);
  m.two(1, 3, random_unitary(4, rng), cfg);
  std::array<int, 16> counts{};
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ++counts[sample_bitstring(m.net, rng).to_uint()];
  double chi2 = 0;
  int dof = -1;
  for (int x = 0; x < 16; ++x) {
    const double e = draws * std::norm(m.psi[x]);
    if (e < 5) continue;
    chi2 += std::pow(counts[x] - e, 2) / e;
    ++dof;
  }
  // 0.01 critical value of chi-square with 15 degrees of freedom is 30.58.
  ASSERT_LE(dof, 15);
  EXPECT_LT(chi2, 30.58);
}

TEST(Fpeps, StatevectorOracleTrees) {
  Rng rng(13);
  SimConfig cfg;
  cfg.chi = 16;
  cfg.kappa = 7;
  for (int t = 0; t < 10; ++t) {
    Mirrored m(8);
    std::uniform_int_distribution<int> pick(0, 7);
    for (int g = 0; g < 30; ++g) {
      if (g % 3 == 0) {
        m.one(pick(rng), random_unitary(2, rng));
        continue;
      }
      const int q = 1 + pick(rng) % 7;
      m.two(q / 2, q, random_unitary(4, rng), cfg);  // binary-tree couplings
    }
    EXPECT_GE(m.fidelity(), 1 - 1e-8);
  }
}

TEST(Fpeps, InvariantsUnderRandomSequences) {
  Rng rng(14);
  for (int t = 0; t < 5; ++t) {
    SimConfig cfg;
    cfg.chi = 4;
    cfg.kappa = 2;
    FlexNetState s(6);
    std::uniform_int_distribution<int> pick(0, 5);
    for (int g = 0; g < 100; ++g) {
      const int i = pick(rng);
      if (g % 2) {
        apply_one_body(s, i, random_unitary(2, rng));
      } else {
        int j = pick(rng);
        if (j == i) j = (i + 1) % 6;
        apply_two_body(s, i, j, random_unitary(4, rng), cfg);
      }
      expect_invariants(s, cfg);
    }
  }
}

TEST(Fpeps, EntropyInvariantUnderLocalUnitaries) {
  Rng rng(15);
  SimConfig cfg;
  for (int t = 0; t < 20; ++t) {
    auto s = init_product(3);
    apply_two_body(s, 0, 1, random_unitary(4, rng), cfg);
    apply_two_body(s, 1, 2, random_unitary(4, rng), cfg);
    const double h01 = bond_entropy(s, 0, 1), h12 = bond_entropy(s, 1, 2);
    for (int q = 0; q < 3; ++q) apply_one_body(s, q, random_unitary(2, rng));
    EXPECT_NEAR(bond_entropy(s, 0, 1), h01, 1e-10);
    EXPECT_NEAR(bond_entropy(s, 1, 2), h12, 1e-10);
  }
}

TEST(Fpeps, ImaginaryTimeSingleQubit) {
  auto s = init_product(1);
  apply_one_body(s, 0, gates::hadamard());
  imaginary_time_evolve(s, {{{0}, gates::pauli('Z')}}, 0.1, 200, SimConfig{});
  EXPECT_GE(std::norm(to_statevector(s)[1]), 1 - 1e-6);
}

TEST(Fpeps, ImaginaryTimeZZ) {
  Rng rng(16);
  SimConfig cfg;
  auto s = init_product(2);
  apply_one_body(s, 0, random_unitary(2, rng));
  apply_one_body(s, 1, random_unitary(2, rng));
  apply_two_body(s, 0, 1, random_unitary(4, rng), cfg);
  const std::vector<HamiltonianTerm> h{{{0, 1}, gates::kron(gates::pauli('Z'), gates::pauli('Z'))}};
  std::vector<double> energies;
  imaginary_time_evolve(s, h, 0.1, 200, cfg, &energies);
  EXPECT_NEAR(energies.back(), -1.0, 1e-6);
  for (std::size_t k = 1; k < energies.size(); ++k) EXPECT_LE(energies[k], energies[k - 1] + 1e-6);
  const VectorC v = to_statevector(s);
  EXPECT_NEAR(std::norm(v[1]) + std::norm(v[2]), 1.0, 1e-6);
}

TEST(Fpeps, ImaginaryTimeZeroHamiltonian) {
  Rng rng(17);
  auto s = init_product(2);
  apply_one_body(s, 0, random_unitary(2, rng));
  const VectorC before = to_statevector(s);
  imaginary_time_evolve(s, {{{0}, MatrixC::Zero(2, 2)}, {{0, 1}, MatrixC::Zero(4, 4)}}, 0.1, 10, SimConfig{});
  EXPECT_NEAR(oracle::fidelity(before, to_statevector(s)), 1.0, 1e-12);
  EXPECT_THROW(imaginary_time_evolve(s, {}, 0.0, 1, SimConfig{}), ConfigError);
}

TEST(Fpeps, CircuitRecordsAndDump) {
  const std::vector<GateRecord> c{{"h", {0}, {}, {}}, {"cx", {0, 1}, {}, {}}, {"u", {2}, {0.3, 0.1, -0.2}, {}}};
  const auto s = run_circuit(3, c, SimConfig{});
  const std::string json = to_json(s);
  EXPECT_NE(json.find("\"edges\":[{\"u\":0,\"v\":1"), std::string::npos);
  EXPECT_THROW(gate_matrix({"cx", {0}, {}, {}}), InvalidGateError);
  EXPECT_THROW(gate_matrix({"nope", {0}, {}, {}}), InvalidGateError);
  EXPECT_TRUE(is_unitary(gates::u3(0.4, 1.1, -0.7), 1e-12));
}
