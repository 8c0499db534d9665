#pragma once

// Flexible-PEPS circuit simulator.
//
// One vertex tensor Gamma per qubit (a physical axis of dimension 2 plus one
// axis per incident edge) and one diagonal weight vector lambda per edge.
// Two-qubit gates use the simple update; the bond is truncated to chi and a
// vertex that ends up with more than kappa edges loses its lowest-entropy
// edges by rank-1 truncation.
//
// Expectation values, reduced density matrices and sampling contract the
// double layer exactly along a BFS spanning tree rooted at the qubit of
// interest. Edges outside the tree are closed with their lambda weights
// (the usual simple-update environment), so the result is exact on trees and
// product states and a mean-field approximation on loops.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tnattack/bitstring.hpp"
#include "tnattack/linalg.hpp"
#include "tnattack/rng.hpp"
#include "tnattack/tensor.hpp"

namespace tnattack {

struct SimConfig {
  std::size_t chi = 16;
  std::size_t kappa = 4;
  double svd_cutoff = 1e-12;
  std::uint64_t seed = 0;

  void validate() const {
    if (chi < 1 || kappa < 1) throw ConfigError("fpeps: chi and kappa must be at least 1");
    if (!(svd_cutoff >= 0)) throw ConfigError("fpeps: svd_cutoff must be non-negative");
  }
};

struct Edge {
  int id = 0;
  VectorR lambda;  // descending, sum of squares 1
};

using EdgeKey = std::pair<int, int>;  // (lower id, higher id)

inline EdgeKey edge_key(int i, int j) { return i < j ? EdgeKey{i, j} : EdgeKey{j, i}; }

class FlexNetState {
 public:
  FlexNetState() = default;

  // Product state |0...0> with no edges.
  explicit FlexNetState(std::size_t n_qubits) {
    if (n_qubits < 1) throw ShapeError("FlexNetState: need at least one qubit");
    vertices_.reserve(n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
      Tensor t({phys_label(static_cast<int>(q))}, {2});
      t.data[0] = 1.0;
      vertices_.push_back(std::move(t));
    }
  }

  static int phys_label(int q) { return -1 - q; }

  std::size_t num_qubits() const noexcept { return vertices_.size(); }
  const Tensor& vertex(int q) const { return vertices_.at(check(q)); }
  Tensor& vertex(int q) { return vertices_.at(check(q)); }

  const std::map<EdgeKey, Edge>& edges() const noexcept { return edges_; }
  bool has_edge(int i, int j) const { return edges_.count(edge_key(i, j)) != 0; }
  const Edge& edge(int i, int j) const {
    const auto it = edges_.find(edge_key(i, j));
    if (it == edges_.end())
      throw NotFoundError("FlexNetState: no edge between " + std::to_string(i) + " and " + std::to_string(j));
    return it->second;
  }
  Edge& edge(int i, int j) { return const_cast<Edge&>(std::as_const(*this).edge(i, j)); }

  std::vector<int> neighbors(int q) const {
    check(q);
    std::vector<int> out;
    for (const auto& [key, e] : edges_) {
      if (key.first == q) out.push_back(key.second);
      if (key.second == q) out.push_back(key.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(int q) const { return neighbors(q).size(); }

  // Adds a bond of dimension 1 with lambda = (1); the state is unchanged.
  Edge& add_edge(int i, int j) {
    check(i);
    check(j);
    if (i == j) throw ShapeError("FlexNetState: self-loops are not allowed");
    if (has_edge(i, j)) throw ShapeError("FlexNetState: edge already exists");
    Edge e{next_edge_id_++, VectorR::Ones(1)};
    add_unit_axis(vertices_[static_cast<std::size_t>(i)], e.id);
    add_unit_axis(vertices_[static_cast<std::size_t>(j)], e.id);
    return edges_.emplace(edge_key(i, j), std::move(e)).first->second;
  }

  void erase_edge(int i, int j) { edges_.erase(edge_key(i, j)); }

  std::size_t check(int q) const {
    if (q < 0 || static_cast<std::size_t>(q) >= vertices_.size())
      throw NotFoundError("FlexNetState: no qubit " + std::to_string(q));
    return static_cast<std::size_t>(q);
  }

 private:
  std::vector<Tensor> vertices_;
  std::map<EdgeKey, Edge> edges_;
  int next_edge_id_ = 0;
};

inline FlexNetState init_product(std::size_t n_qubits) { return FlexNetState(n_qubits); }

// -Sum p ln p over p = lambda^2.
inline double bond_entropy(const VectorR& lambda) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double p = lambda[k] * lambda[k];
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

inline double bond_entropy(const FlexNetState& s, int i, int j) { return bond_entropy(s.edge(i, j).lambda); }

inline void apply_one_body(FlexNetState& s, int q, const MatrixC& gate, bool allow_non_unitary = false) {
  if (gate.rows() != 2 || gate.cols() != 2) throw InvalidGateError("apply_one_body: gate must be 2x2");
  if (!allow_non_unitary && !is_unitary(gate, 1e-10)) throw InvalidGateError("apply_one_body: gate is not unitary");
  Tensor& v = s.vertex(q);
  v = mode_product(v, FlexNetState::phys_label(q), gate.transpose());
  if (allow_non_unitary) {
    const double n = v.data.norm();
    if (!(n > 0) || !std::isfinite(n)) throw InvalidStateError("apply_one_body: operator annihilated the state");
    v.data /= n;
  }
}

// Removes edge (i, j), keeping only its leading singular value. Exact when
// the edge has rank 1.
inline void delete_edge(FlexNetState& s, int i, int j) {
  const Edge e = s.edge(i, j);
  const double w = std::sqrt(e.lambda[0]);
  for (int v : {i, j}) {
    Tensor& t = s.vertex(v);
    t = slice_axis(t, e.id, 0);
    t.data *= w;
  }
  s.erase_edge(i, j);
}

// Deletes the incident edge of lowest entropy until degree(v) <= kappa. Ties
// (within 1e-12) go to the lexicographically smallest (min id, max id) pair.
inline void enforce_degree_cap(FlexNetState& s, int v, const SimConfig& cfg) {
  while (s.degree(v) > cfg.kappa) {
    std::optional<EdgeKey> best;
    double best_h = 0.0;
    for (const auto& [key, e] : s.edges()) {
      if (key.first != v && key.second != v) continue;
      const double h = bond_entropy(e.lambda);
      if (!best || h < best_h - 1e-12) {
        best = key;
        best_h = h;
      }
    }
    delete_edge(s, best->first, best->second);
  }
}

namespace fpeps_detail {

inline VectorR guarded_inverse(const VectorR& w) {
  VectorR out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) out[k] = w[k] > 1e-300 ? 1.0 / w[k] : 0.0;
  return out;
}

inline RowMatrixC matricize_as(const Tensor& t, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> order = rows;
  order.insert(order.end(), cols.begin(), cols.end());
  return matricize(permute(t, order), rows);
}

struct Reduced {
  std::vector<int> others;  // edge labels other than the gate edge
  std::vector<Eigen::Index> other_dims;
  MatrixC q;  // others x r
  MatrixC r;  // r x (2 * D), column p * D + e
};

// Absorbs the other edges' lambdas into Gamma_v and QR-reduces it so that
// only an (r x 2D) factor takes part in the gate.
inline Reduced reduce(const FlexNetState& s, int v, int bond) {
  Tensor a = s.vertex(v);
  Reduced out;
  for (int u : s.neighbors(v)) {
    const Edge& e = s.edge(v, u);
    if (e.id == bond) continue;
    out.others.push_back(e.id);
    out.other_dims.push_back(e.lambda.size());
    scale_axis(a, e.id, e.lambda);
  }
  const MatrixC m = matricize_as(a, out.others, {FlexNetState::phys_label(v), bond});
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixC> qr(m);
  out.q = qr.householderQ() * MatrixC::Identity(m.rows(), k);
  out.r = out.q.adjoint() * m;
  return out;
}

// Inverse of reduce for the updated factor f (r x (2 * D')).
inline Tensor restore(const FlexNetState& s, int v, const Reduced& red, const MatrixC& f, int bond, Eigen::Index new_dim) {
  const RowMatrixC full = red.q * f;
  std::vector<int> labels = red.others;
  std::vector<Eigen::Index> dims = red.other_dims;
  labels.push_back(FlexNetState::phys_label(v));
  dims.push_back(2);
  labels.push_back(bond);
  dims.push_back(new_dim);
  Tensor t = from_matrix(full, labels, dims);
  for (int u : s.neighbors(v)) {
    const Edge& e = s.edge(v, u);
    if (e.id != bond) scale_axis(t, e.id, guarded_inverse(e.lambda));
  }
  return t;
}

}  // namespace fpeps_detail

// Simple update of a two-qubit gate. The gate's row index is 2*b_i + b_j.
inline void apply_two_body(FlexNetState& s, int i, int j, const MatrixC& gate, const SimConfig& cfg,
                           bool allow_non_unitary = false) {
  cfg.validate();
  if (i == j) throw InvalidGateError("apply_two_body: qubits must differ");
  s.check(i);
  s.check(j);
  if (gate.rows() != 4 || gate.cols() != 4) throw InvalidGateError("apply_two_body: gate must be 4x4");
  if (!allow_non_unitary && !is_unitary(gate, 1e-10)) throw InvalidGateError("apply_two_body: gate is not unitary");
  if (!s.has_edge(i, j)) s.add_edge(i, j);
  const Edge& e = s.edge(i, j);
  const int bond = e.id;
  const VectorR lambda = e.lambda;
  const Eigen::Index d = lambda.size();

  const auto ri = fpeps_detail::reduce(s, i, bond);
  const auto rj = fpeps_detail::reduce(s, j, bond);
  const Eigen::Index ni = ri.r.rows(), nj = rj.r.rows();

  // theta[pi][pj] = Ri(:, pi) diag(lambda) Rj(:, pj)^T, then the gate mixes (pi, pj).
  std::array<std::array<MatrixC, 2>, 2> theta;
  for (int pi = 0; pi < 2; ++pi)
    for (int pj = 0; pj < 2; ++pj)
      theta[pi][pj] = ri.r.middleCols(pi * d, d) * lambda.asDiagonal() * rj.r.middleCols(pj * d, d).transpose();
  MatrixC m(ni * 2, 2 * nj);
  for (int qi = 0; qi < 2; ++qi)
    for (int qj = 0; qj < 2; ++qj) {
      MatrixC block = MatrixC::Zero(ni, nj);
      for (int pi = 0; pi < 2; ++pi)
        for (int pj = 0; pj < 2; ++pj) {
          const cplx g = gate(qi * 2 + qj, pi * 2 + pj);
          if (g != cplx(0)) block += g * theta[pi][pj];
        }
      for (Eigen::Index a = 0; a < ni; ++a) m.block(a * 2 + qi, qj * nj, 1, nj) = block.row(a);
    }
  if (!(m.norm() > 0) || !m.allFinite()) throw InvalidStateError("apply_two_body: gate annihilated the state");

  const auto svd = truncated_svd(m, cfg.chi, cfg.svd_cutoff);
  const Eigen::Index k = svd.s.size();
  MatrixC fi(ni, 2 * k), fj(nj, 2 * k);
  for (Eigen::Index a = 0; a < ni; ++a)
    for (int q = 0; q < 2; ++q) fi.block(a, q * k, 1, k) = svd.u.row(a * 2 + q);
  for (Eigen::Index b = 0; b < nj; ++b)
    for (int q = 0; q < 2; ++q) fj.block(b, q * k, 1, k) = svd.v.row(q * nj + b).conjugate();

  Tensor gi = fpeps_detail::restore(s, i, ri, fi, bond, k);
  Tensor gj = fpeps_detail::restore(s, j, rj, fj, bond, k);
  s.vertex(i) = std::move(gi);
  s.vertex(j) = std::move(gj);
  s.edge(i, j).lambda = svd.s / svd.s.norm();

  enforce_degree_cap(s, std::min(i, j), cfg);
  enforce_degree_cap(s, std::max(i, j), cfg);
}

namespace fpeps_detail {

// Gamma_v with sqrt(lambda) on every incident edge, so that contracting the
// weighted vertices over shared labels gives the full state.
inline Tensor weighted_vertex(const FlexNetState& s, int v) {
  Tensor a = s.vertex(v);
  for (int u : s.neighbors(v)) {
    const Edge& e = s.edge(v, u);
    scale_axis(a, e.id, e.lambda.cwiseSqrt());
  }
  return a;
}

struct Spanning {
  std::vector<int> order;                // BFS order from the root
  std::map<int, int> parent;             // vertex -> parent vertex
};

inline Spanning bfs(const FlexNetState& s, int root) {
  Spanning t;
  std::vector<bool> seen(s.num_qubits(), false);
  std::queue<int> q;
  q.push(root);
  seen[static_cast<std::size_t>(root)] = true;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    t.order.push_back(v);
    for (int u : s.neighbors(v))
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        t.parent[u] = v;
        q.push(u);
      }
  }
  return t;
}

using Ops = std::map<int, MatrixC>;

// <psi| (ops on other qubits) |psi> with the root's physical index left open:
// returns the unnormalised 2x2 matrix rho[p, p'].
inline MatrixC root_environment(const FlexNetState& s, int root, const Ops& ops) {
  const Spanning tree = bfs(s, root);
  std::map<int, MatrixC> message;  // child vertex -> matrix over its parent edge
  auto closed = [&](int v, std::optional<int> parent_bond) {
    const Tensor a = weighted_vertex(s, v);
    Tensor b = a;
    for (int u : s.neighbors(v)) {
      const Edge& e = s.edge(v, u);
      if (parent_bond && e.id == *parent_bond) continue;
      const auto pit = tree.parent.find(u);
      if (pit != tree.parent.end() && pit->second == v) b = mode_product(b, e.id, message.at(u));
      else b = mode_product(b, e.id, e.lambda.cast<cplx>().asDiagonal().toDenseMatrix());
    }
    const int phys = FlexNetState::phys_label(v);
    const auto op = ops.find(v);
    if (op != ops.end() && v != root) b = mode_product(b, phys, op->second.transpose());
    const int open = parent_bond ? *parent_bond : phys;
    return MatrixC(matricize(b, {open}) * matricize(a, {open}).adjoint());
  };
  for (std::size_t k = tree.order.size(); k-- > 1;) {
    const int v = tree.order[k];
    message[v] = closed(v, s.edge(v, tree.parent.at(v)).id);
  }
  return closed(root, std::nullopt);
}

inline bool same_component(const FlexNetState& s, int a, int b) {
  const auto t = bfs(s, a);
  return std::find(t.order.begin(), t.order.end(), b) != t.order.end();
}

inline MatrixC normalise_density(MatrixC rho) {
  const cplx tr = rho.trace();
  if (!(std::abs(tr) > 0) || !rho.allFinite()) throw InvalidStateError("reduced density matrix has zero trace");
  rho /= tr;
  return (rho + rho.adjoint()) / 2.0;
}

}  // namespace fpeps_detail

inline MatrixC reduced_density_matrix(const FlexNetState& s, int q) {
  s.check(q);
  return fpeps_detail::normalise_density(fpeps_detail::root_environment(s, q, {}));
}

// Two-qubit reduced density matrix, row index 2*b_i + b_j.
inline MatrixC reduced_density_matrix(const FlexNetState& s, int i, int j) {
  s.check(i);
  s.check(j);
  if (i == j) throw ShapeError("reduced_density_matrix: qubits must differ");
  if (!fpeps_detail::same_component(s, i, j)) {
    const MatrixC a = reduced_density_matrix(s, i), b = reduced_density_matrix(s, j);
    MatrixC out(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) out(r, c) = a(r / 2, c / 2) * b(r % 2, c % 2);
    return out;
  }
  MatrixC rho(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      MatrixC op = MatrixC::Zero(2, 2);
      op(b, a) = 1.0;
      const MatrixC r = fpeps_detail::root_environment(s, i, {{j, op}});
      for (int p = 0; p < 2; ++p)
        for (int pp = 0; pp < 2; ++pp) rho(p * 2 + a, pp * 2 + b) = r(p, pp);
    }
  return fpeps_detail::normalise_density(rho);
}

struct SampleOutcome {
  BitString bits;
  std::size_t degenerate = 0;  // qubits drawn uniformly after a zero-norm conditional
};

// Sequential conditional sampling in qubit order.
inline SampleOutcome sample_bitstring_detailed(const FlexNetState& s, Rng& rng) {
  const std::size_t n = s.num_qubits();
  SampleOutcome out{BitString(n), 0};
  fpeps_detail::Ops fixed;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t q = 0; q < n; ++q) {
    const int v = static_cast<int>(q);
    const MatrixC r = fpeps_detail::root_environment(s, v, fixed);
    const double p0 = std::max(r(0, 0).real(), 0.0), p1 = std::max(r(1, 1).real(), 0.0);
    int bit;
    if (!(p0 + p1 > 1e-300) || !std::isfinite(p0 + p1)) {
      bit = uni(rng) < 0.5 ? 1 : 0;
      ++out.degenerate;
    } else {
      bit = uni(rng) * (p0 + p1) < p1 ? 1 : 0;
    }
    out.bits.set(q, bit);
    MatrixC proj = MatrixC::Zero(2, 2);
    proj(bit, bit) = 1.0;
    fixed[v] = proj;
  }
  return out;
}

inline BitString sample_bitstring(const FlexNetState& s, Rng& rng) { return sample_bitstring_detailed(s, rng).bits; }

// Exact contraction of the whole network; qubit 0 is the most significant
// bit of the index. The result is normalised.
inline VectorC to_statevector(const FlexNetState& s) {
  const std::size_t n = s.num_qubits();
  if (n > 20) throw ShapeError("to_statevector: too many qubits");
  Tensor acc = fpeps_detail::weighted_vertex(s, 0);
  for (std::size_t q = 1; q < n; ++q) acc = contract(acc, fpeps_detail::weighted_vertex(s, static_cast<int>(q)));
  std::vector<int> order(n);
  for (std::size_t q = 0; q < n; ++q) order[q] = FlexNetState::phys_label(static_cast<int>(q));
  VectorC psi = permute(acc, order).data;
  const double nrm = psi.norm();
  if (!(nrm > 0)) throw InvalidStateError("to_statevector: state has zero norm");
  return psi / nrm;
}

// ---- gates and circuits ----

namespace gates {

inline MatrixC u3(double theta, double phi, double lam) {
  const cplx i(0, 1);
  MatrixC g(2, 2);
  g << std::cos(theta / 2), -std::exp(i * lam) * std::sin(theta / 2), std::exp(i * phi) * std::sin(theta / 2),
      std::exp(i * (phi + lam)) * std::cos(theta / 2);
  return g;
}

inline MatrixC pauli(char which) {
  MatrixC g(2, 2);
  switch (which) {
    case 'I': g << 1, 0, 0, 1; break;
    case 'X': g << 0, 1, 1, 0; break;
    case 'Y': g << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': g << 1, 0, 0, -1; break;
    default: throw InvalidGateError(std::string("pauli: unknown operator ") + which);
  }
  return g;
}

inline MatrixC hadamard() {
  MatrixC g(2, 2);
  g << 1, 1, 1, -1;
  return g / std::sqrt(2.0);
}

inline MatrixC cnot() {
  MatrixC g = MatrixC::Zero(4, 4);
  g(0, 0) = g(1, 1) = g(2, 3) = g(3, 2) = 1.0;
  return g;
}

inline MatrixC cz() {
  MatrixC g = MatrixC::Identity(4, 4);
  g(3, 3) = -1.0;
  return g;
}

inline MatrixC swap() {
  MatrixC g = MatrixC::Zero(4, 4);
  g(0, 0) = g(1, 2) = g(2, 1) = g(3, 3) = 1.0;
  return g;
}

inline MatrixC kron(const MatrixC& a, const MatrixC& b) {
  MatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

}  // namespace gates

// One circuit instruction: gate name, target qubits, real parameters.
struct GateRecord {
  std::string name;
  std::vector<int> qubits;
  std::vector<double> params;
  std::vector<cplx> matrix;  // row-major, only for name == "unitary"

  friend bool operator==(const GateRecord&, const GateRecord&) = default;
};

// Known names: i x y z h s t rx ry rz u (one qubit); cx cnot cz swap (two
// qubits); "unitary" with an explicit matrix on one or two qubits.
inline MatrixC gate_matrix(const GateRecord& g) {
  auto need = [&](std::size_t qubits, std::size_t params) {
    if (g.qubits.size() != qubits || g.params.size() != params)
      throw InvalidGateError("gate " + g.name + ": expected " + std::to_string(qubits) + " qubits and " +
                             std::to_string(params) + " parameters");
  };
  const cplx i(0, 1);
  if (g.name == "unitary") {
    const Eigen::Index d = Eigen::Index{1} << g.qubits.size();
    if (g.qubits.empty() || g.qubits.size() > 2 || static_cast<Eigen::Index>(g.matrix.size()) != d * d)
      throw InvalidGateError("gate unitary: bad matrix shape");
    MatrixC m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = g.matrix[static_cast<std::size_t>(r * d + c)];
    return m;
  }
  if (g.name == "i" || g.name == "x" || g.name == "y" || g.name == "z") {
    need(1, 0);
    return gates::pauli(static_cast<char>(std::toupper(g.name[0])));
  }
  if (g.name == "h") {
    need(1, 0);
    return gates::hadamard();
  }
  if (g.name == "s" || g.name == "t") {
    need(1, 0);
    MatrixC m = MatrixC::Identity(2, 2);
    m(1, 1) = g.name == "s" ? i : std::exp(i * M_PI / 4.0);
    return m;
  }
  if (g.name == "rx" || g.name == "ry" || g.name == "rz") {
    need(1, 1);
    const MatrixC p = gates::pauli(static_cast<char>(std::toupper(g.name[1])));
    return std::cos(g.params[0] / 2) * MatrixC::Identity(2, 2) - i * std::sin(g.params[0] / 2) * p;
  }
  if (g.name == "u") {
    need(1, 3);
    return gates::u3(g.params[0], g.params[1], g.params[2]);
  }
  if (g.name == "cx" || g.name == "cnot") {
    need(2, 0);
    return gates::cnot();
  }
  if (g.name == "cz") {
    need(2, 0);
    return gates::cz();
  }
  if (g.name == "swap") {
    need(2, 0);
    return gates::swap();
  }
  throw InvalidGateError("unknown gate: " + g.name);
}

inline void apply_gate(FlexNetState& s, const GateRecord& g, const SimConfig& cfg) {
  const MatrixC m = gate_matrix(g);
  if (g.qubits.size() == 1) apply_one_body(s, g.qubits[0], m);
  else apply_two_body(s, g.qubits[0], g.qubits[1], m, cfg);
}

inline FlexNetState run_circuit(std::size_t n_qubits, const std::vector<GateRecord>& circuit, const SimConfig& cfg) {
  FlexNetState s(n_qubits);
  for (const auto& g : circuit) apply_gate(s, g, cfg);
  return s;
}

// ---- Hamiltonians and imaginary time ----

struct HamiltonianTerm {
  std::vector<int> qubits;  // one or two qubits
  MatrixC matrix;           // Hermitian, 2x2 or 4x4 (row index 2*b_0 + b_1)
};

inline cplx expectation(const FlexNetState& s, const HamiltonianTerm& t) {
  if (t.qubits.size() == 1) return (reduced_density_matrix(s, t.qubits[0]) * t.matrix).trace();
  if (t.qubits.size() == 2) return (reduced_density_matrix(s, t.qubits[0], t.qubits[1]) * t.matrix).trace();
  throw ShapeError("expectation: terms act on one or two qubits");
}

inline double energy(const FlexNetState& s, const std::vector<HamiltonianTerm>& h) {
  double e = 0.0;
  for (const auto& t : h) e += expectation(s, t).real();
  return e;
}

// First-order Trotter evolution under exp(-tau * term) for each term per step.
inline void imaginary_time_evolve(FlexNetState& s, const std::vector<HamiltonianTerm>& h, double tau, int n_steps,
                                  const SimConfig& cfg, std::vector<double>* energies = nullptr) {
  if (!(tau > 0)) throw ConfigError("imaginary_time_evolve: tau must be positive");
  if (n_steps < 0) throw ConfigError("imaginary_time_evolve: n_steps must be non-negative");
  std::vector<MatrixC> propagators;
  for (const auto& t : h) {
    const Eigen::Index d = Eigen::Index{1} << t.qubits.size();
    if (t.qubits.empty() || t.qubits.size() > 2 || t.matrix.rows() != d || t.matrix.cols() != d)
      throw ShapeError("imaginary_time_evolve: term shape does not match its qubits");
    if (!is_hermitian(t.matrix, 1e-10)) throw InvalidGateError("imaginary_time_evolve: term is not Hermitian");
    propagators.push_back(hermitian_exp(t.matrix, tau));
  }
  if (energies) energies->push_back(energy(s, h));
  for (int step = 0; step < n_steps; ++step) {
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h[k].qubits.size() == 1) apply_one_body(s, h[k].qubits[0], propagators[k], true);
      else apply_two_body(s, h[k].qubits[0], h[k].qubits[1], propagators[k], cfg, true);
    }
    if (energies) energies->push_back(energy(s, h));
  }
}

// ---- diagnostics ----

inline std::string to_json(const FlexNetState& s) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"qubits\":" << s.num_qubits() << ",\"vertices\":[";
  for (std::size_t q = 0; q < s.num_qubits(); ++q) {
    const Tensor& t = s.vertex(static_cast<int>(q));
    os << (q ? "," : "") << "{\"id\":" << q << ",\"labels\":[";
    for (std::size_t a = 0; a < t.rank(); ++a) os << (a ? "," : "") << t.labels[a];
    os << "],\"shape\":[";
    for (std::size_t a = 0; a < t.rank(); ++a) os << (a ? "," : "") << t.dims[a];
    os << "]}";
  }
  os << "],\"edges\":[";
  bool first = true;
  for (const auto& [key, e] : s.edges()) {
    os << (first ? "" : ",") << "{\"u\":" << key.first << ",\"v\":" << key.second << ",\"label\":" << e.id
       << ",\"entropy\":" << bond_entropy(e.lambda) << ",\"lambda\":[";
    for (Eigen::Index k = 0; k < e.lambda.size(); ++k) os << (k ? "," : "") << e.lambda[k];
    os << "]}";
    first = false;
  }
  os << "]}";
  return os.str();
}

}  // namespace tnattack
