#include "qstab/jumpcode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qstab::jumpcode {

using qcore::Pauli;
using qcore::PauliString;
using qcore::StateVector;

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::uint64_t complement_word(std::uint64_t w, int n) {
  return ~w & ((1ULL << n) - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Code construction

JumpCode build_code(int n_logical, double phi, CodeVariant variant) {
  JumpCode code;
  code.variant = variant;
  code.phi = phi;
  const Complex rel = std::exp(Complex(0, 1) * phi);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  if (variant == CodeVariant::FourQubit) {
    code.n_logical = 0;  // three basis states, not a qubit register
    code.n_physical = 4;
    const std::uint64_t words[3] = {0b0011, 0b0101, 0b0110};
    for (std::uint64_t w : words) {
      CVector amps = CVector::Zero(16);
      amps[static_cast<Eigen::Index>(w)] = inv_sqrt2;
      amps[static_cast<Eigen::Index>(complement_word(w, 4))] = inv_sqrt2 * rel;
      code.codewords.emplace_back(4, std::move(amps));
    }
    return code;
  }

  require(n_logical >= 1, "build_code: n_logical must be >= 1");
  code.n_logical = n_logical;
  code.n_physical = 2 * n_logical + 2;
  const int n_p = code.n_physical;
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_p;
  const std::uint64_t n_words = 1ULL << n_logical;
  for (std::uint64_t k = 0; k < n_words; ++k) {
    // logical bit i (MSB-first) -> pair (2i, 2i+1): 0 -> 01, 1 -> 10;
    // trailing ancilla pair fixed at 01.
    std::uint64_t w = 0;
    for (int i = 0; i < n_logical; ++i) {
      const int bit = static_cast<int>((k >> (n_logical - 1 - i)) & 1ULL);
      const std::uint64_t pair = bit ? 0b10ULL : 0b01ULL;
      w |= pair << (n_p - 2 - 2 * i);
    }
    w |= 0b01ULL;  // ancilla pair at the least significant positions
    CVector amps = CVector::Zero(dim);
    amps[static_cast<Eigen::Index>(w)] = inv_sqrt2;
    amps[static_cast<Eigen::Index>(complement_word(w, n_p))] = inv_sqrt2 * rel;
    code.codewords.emplace_back(n_p, std::move(amps));
  }
  return code;
}

StateVector encode(const StateVector& logical, const JumpCode& code) {
  require(code.variant == CodeVariant::Tensor, "encode: tensor codes only");
  require(logical.qubits() == code.n_logical, "encode: logical register size mismatch");
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(1) << code.n_physical);
  for (Eigen::Index k = 0; k < logical.dim(); ++k) {
    const Complex a = logical.amps()[k];
    if (a == Complex(0, 0)) continue;
    amps += a * code.codewords[static_cast<std::size_t>(k)].amps();
  }
  return StateVector(code.n_physical, std::move(amps));
}

// ---------------------------------------------------------------------------
// Recovery

void apply_recovery_inplace(CVector& amps, int n_qubits, int jump_qubit) {
  require(jump_qubit >= 0 && jump_qubit < n_qubits, "recovery: qubit out of range");
  const std::vector<int> tgt{jump_qubit};
  qcore::apply_gate_inplace(amps, n_qubits, qcore::hadamard(), tgt);
  const Matrix cx = qcore::cnot();
  for (int j = 0; j < n_qubits; ++j) {
    if (j == jump_qubit) continue;
    const std::vector<int> pair{jump_qubit, j};
    qcore::apply_gate_inplace(amps, n_qubits, cx, pair);
  }
  qcore::apply_gate_inplace(amps, n_qubits, qcore::pauli_matrix(Pauli::X), tgt);
}

StateVector recovery(const StateVector& state, int jump_qubit, const JumpCode& code) {
  require(state.qubits() == code.n_physical, "recovery: register size mismatch");
  StateVector out = state;
  apply_recovery_inplace(out.amps(), out.qubits(), jump_qubit);
  return out;
}

// ---------------------------------------------------------------------------
// Projectors

CodespaceProjector CodespaceProjector::dfs(int n_physical) {
  require(n_physical >= 2 && n_physical % 2 == 0, "dfs projector: n_physical must be even");
  CodespaceProjector p;
  p.dim = static_cast<Eigen::Index>(1) << n_physical;
  p.diagonal = true;
  p.diag = Eigen::VectorXd::Zero(p.dim);
  for (Eigen::Index i = 0; i < p.dim; ++i) {
    if (std::popcount(static_cast<std::uint64_t>(i)) == n_physical / 2) p.diag[i] = 1.0;
  }
  p.matrix = p.diag.cast<Complex>().asDiagonal();
  return p;
}

CodespaceProjector CodespaceProjector::code_span(const JumpCode& code) {
  CodespaceProjector p;
  p.dim = static_cast<Eigen::Index>(1) << code.n_physical;
  p.diagonal = false;
  p.matrix = Matrix::Zero(p.dim, p.dim);
  for (const auto& cw : code.codewords)
    p.matrix += cw.amps() * cw.amps().adjoint();
  return p;
}

StateVector CodespaceProjector::apply(const StateVector& state) const {
  require(state.dim() == dim, "projector: dimension mismatch");
  return StateVector(state.qubits(), matrix * state.amps());
}

bool CodespaceProjector::contains(const StateVector& state, double tolerance) const {
  const CVector res = state.amps() - matrix * state.amps();
  return res.norm() <= tolerance;
}

// ---------------------------------------------------------------------------
// Flip and swap decoupling operators

PauliString flip_operator(int n_physical) {
  require(n_physical >= 1, "flip_operator: empty register");
  std::vector<Pauli> word(static_cast<std::size_t>(n_physical), Pauli::I);
  for (int q = 0; q < n_physical; q += 2) word[static_cast<std::size_t>(q)] = Pauli::Z;
  return PauliString(std::move(word));
}

bool flip_preserves_code(const JumpCode& code) {
  const PauliString uf = flip_operator(code.n_physical);
  for (const auto& cw : code.codewords) {
    StateVector mapped = qcore::apply_gate(cw, uf);
    // invariant iff mapped = +- codeword
    const double overlap = std::abs(cw.overlap(mapped));
    if (std::abs(overlap - 1.0) > tol::kCodeSpace) return false;
  }
  return true;
}

PermutationTracker PermutationTracker::identity(int n) {
  PermutationTracker t;
  t.sigma.resize(static_cast<std::size_t>(n));
  std::iota(t.sigma.begin(), t.sigma.end(), 0);
  return t;
}

SwapLayer random_swap_layer(PermutationTracker& tracker, RngStream& rng, int n_physical) {
  require(static_cast<int>(tracker.sigma.size()) == n_physical,
          "random_swap_layer: tracker size mismatch");
  SwapLayer layer;
  layer.permutation.resize(static_cast<std::size_t>(n_physical));
  std::iota(layer.permutation.begin(), layer.permutation.end(), 0);
  // Fisher-Yates; each slot swap is one physical transposition. The array
  // composes them input-side, so the execution order is the reverse of the
  // draw order.
  for (int i = n_physical - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(i + 1)));
    if (j == i) continue;
    std::swap(layer.permutation[static_cast<std::size_t>(i)],
              layer.permutation[static_cast<std::size_t>(j)]);
    layer.transpositions.emplace_back(j, i);
  }
  std::reverse(layer.transpositions.begin(), layer.transpositions.end());
  for (auto& s : tracker.sigma) s = layer.permutation[static_cast<std::size_t>(s)];
  tracker.history.insert(tracker.history.end(), layer.transpositions.begin(),
                         layer.transpositions.end());
  return layer;
}

void apply_permutation_inplace(CVector& amps, int n_qubits, const std::vector<int>& perm) {
  require(static_cast<int>(perm.size()) == n_qubits, "apply_permutation: size mismatch");
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  CVector out(amps.size());
  for (std::uint64_t i = 0; i < dim; ++i) {
    std::uint64_t j = 0;
    for (int q = 0; q < n_qubits; ++q) {
      const std::uint64_t bit = (i >> qcore::bit_position(n_qubits, q)) & 1ULL;
      j |= bit << qcore::bit_position(n_qubits, perm[static_cast<std::size_t>(q)]);
    }
    out[static_cast<Eigen::Index>(j)] = amps[static_cast<Eigen::Index>(i)];
  }
  amps.swap(out);
}

StateVector apply_permutation(const StateVector& state, const std::vector<int>& perm) {
  StateVector out = state;
  apply_permutation_inplace(out.amps(), out.qubits(), perm);
  return out;
}

Matrix permutation_matrix(const std::vector<int>& perm, int n_qubits) {
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
  Matrix m = Matrix::Zero(dim, dim);
  CVector col = CVector::Zero(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    col.setZero();
    col[c] = Complex(1, 0);
    apply_permutation_inplace(col, n_qubits, perm);
    for (Eigen::Index r = 0; r < dim; ++r)
      if (col[r] != Complex(0, 0)) m(r, c) = col[r];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Permutation averages

namespace {

// Basis-index image under a qubit permutation.
inline std::uint64_t permute_index(std::uint64_t i, int n, const std::vector<int>& perm) {
  std::uint64_t j = 0;
  for (int q = 0; q < n; ++q) {
    const std::uint64_t bit = (i >> qcore::bit_position(n, q)) & 1ULL;
    j |= bit << qcore::bit_position(n, perm[static_cast<std::size_t>(q)]);
  }
  return j;
}

bool numerically_diagonal(const Matrix& a) {
  const Eigen::Index n = a.rows();
  double off = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) off = std::max(off, std::abs(a(i, j)));
  return off <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

}  // namespace

Matrix permutation_average(const Matrix& a, int n_physical) {
  require(n_physical >= 1 && n_physical <= 8, "permutation_average: n <= 8 (use MC)");
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_physical;
  require(a.rows() == dim && a.cols() == dim, "permutation_average: dimension mismatch");

  std::vector<int> perm(static_cast<std::size_t>(n_physical));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Eigen::Index> image(static_cast<std::size_t>(dim));

  const bool diag_fast = numerically_diagonal(a);
  Matrix acc = Matrix::Zero(dim, dim);
  Eigen::VectorXcd acc_diag = Eigen::VectorXcd::Zero(dim);
  std::size_t count = 0;
  do {
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(dim); ++i)
      image[static_cast<std::size_t>(i)] =
          static_cast<Eigen::Index>(permute_index(i, n_physical, perm));
    if (diag_fast) {
      // (P^dag A P)(i,i) = A(image(i), image(i))
      for (Eigen::Index i = 0; i < dim; ++i)
        acc_diag[i] += a(image[static_cast<std::size_t>(i)], image[static_cast<std::size_t>(i)]);
    } else {
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
          acc(i, j) += a(image[static_cast<std::size_t>(i)], image[static_cast<std::size_t>(j)]);
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (diag_fast) acc = Matrix(acc_diag.asDiagonal());
  return acc / static_cast<double>(count);
}

McAverage permutation_average_mc(const Matrix& a, int n_physical, int samples,
                                 RngStream& rng) {
  require(samples >= 2, "permutation_average_mc: need >= 2 samples");
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_physical;
  require(a.rows() == dim && a.cols() == dim, "permutation_average_mc: dimension mismatch");

  Matrix mean = Matrix::Zero(dim, dim);
  std::vector<double> norms(static_cast<std::size_t>(samples));
  std::vector<int> perm(static_cast<std::size_t>(n_physical));
  for (int s = 0; s < samples; ++s) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n_physical - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    Matrix sample(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto pi = static_cast<Eigen::Index>(
          permute_index(static_cast<std::uint64_t>(i), n_physical, perm));
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto pj = static_cast<Eigen::Index>(
            permute_index(static_cast<std::uint64_t>(j), n_physical, perm));
        sample(i, j) = a(pi, pj);
      }
    }
    mean += sample;
    norms[static_cast<std::size_t>(s)] = sample.norm();
  }
  mean /= static_cast<double>(samples);

  double m = 0, m2 = 0;
  for (double x : norms) {
    m += x;
    m2 += x * x;
  }
  m /= samples;
  const double var = std::max(0.0, m2 / samples - m * m);
  return McAverage{std::move(mean), std::sqrt(var / samples)};
}

// ---------------------------------------------------------------------------
// Closed-form constants

double p_diff_counting(int n_physical) {
  require(n_physical >= 4 && n_physical % 2 == 0, "p_diff_counting: need even n >= 4");
  const std::uint64_t dim = 1ULL << n_physical;
  long long plus = 0, minus = 0;
  for (std::uint64_t w = 0; w < dim; ++w) {
    if (std::popcount(w) != n_physical / 2) continue;
    // all 4-subsets of positions
    for (int a = 0; a < n_physical; ++a)
      for (int b = a + 1; b < n_physical; ++b)
        for (int c = b + 1; c < n_physical; ++c)
          for (int d = c + 1; d < n_physical; ++d) {
            const int ones = static_cast<int>(((w >> a) & 1) + ((w >> b) & 1) +
                                              ((w >> c) & 1) + ((w >> d) & 1));
            if (ones % 2 == 0) ++plus;
            else ++minus;
          }
  }
  return static_cast<double>(plus - minus) / static_cast<double>(plus + minus);
}

CodeConstants code_constants(const perturb::ChainModel& chain, const JumpCode& code) {
  require(chain.n_qubits == code.n_physical, "code_constants: register size mismatch");
  require(chain.z_only(), "code_constants: Z detunings and ZZ couplings only");
  const int n = chain.n_qubits;
  const auto& d = chain.detunings;
  const auto& j = chain.jz;
  const int m = n - 1;  // number of physical couplings

  CodeConstants out;
  out.p_diff = n >= 4 ? 3.0 / (3.0 - 4.0 * n + static_cast<double>(n) * n) : 0.0;

  double sum_j = 0;
  for (int i = 0; i < m; ++i) sum_j += j[i];
  out.c1 = -sum_j / (n - 1);

  double sum_d2 = 0, sum_dd = 0;
  for (int i = 0; i < n; ++i) sum_d2 += d[i] * d[i];
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) sum_dd += d[i] * d[k];

  double sum_j2 = 0, sum_adj = 0, sum_far = 0;
  for (int i = 0; i < m; ++i) sum_j2 += j[i] * j[i];
  for (int i = 0; i + 1 < m; ++i) sum_adj += j[i] * j[i + 1];
  for (int i = 0; i < m; ++i)
    for (int k = i + 2; k < m; ++k) sum_far += j[i] * j[k];

  out.c2 = sum_d2 - 2.0 / (n - 1) * sum_dd + sum_j2 - 2.0 / (n - 1) * sum_adj +
           2.0 * out.p_diff * sum_far;
  out.c3_lower = out.c1 * out.c1;
  out.c3_upper = out.c2 - sum_d2 + 2.0 / (n - 1) * sum_dd;
  return out;
}

}  // namespace qstab::jumpcode
