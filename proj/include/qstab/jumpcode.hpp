#pragma once

#include <utility>
#include <vector>

#include "qstab/perturb.hpp"
#include "qstab/qcore.hpp"
#include "qstab/rng.hpp"

namespace qstab::jumpcode {

enum class CodeVariant { Tensor, FourQubit };

// Detected-jump error correcting code on the half-excitation DFS. Tensor
// codes pair each logical qubit into two physical ones (01 / 10) plus one
// ancilla pair; every codeword is a bitwise-complement superposition
// (|w> + e^{i phi} |w~>)/sqrt(2).
struct JumpCode {
  CodeVariant variant = CodeVariant::Tensor;
  int n_logical = 0;
  int n_physical = 0;
  double phi = 0.0;
  std::vector<qcore::StateVector> codewords;
};

JumpCode build_code(int n_logical, double phi = 0.0,
                    CodeVariant variant = CodeVariant::Tensor);

// Isometry onto the codewords (Tensor codes only).
qcore::StateVector encode(const qcore::StateVector& logical, const JumpCode& code);

// R_i = X_i * prod_{j != i} CNOT_{i,j} * H_i, applied right-to-left.
qcore::StateVector recovery(const qcore::StateVector& state, int jump_qubit,
                            const JumpCode& code);
// Same operation without a code handle (the construction only needs the
// register size and the jump position).
void apply_recovery_inplace(CVector& amps, int n_qubits, int jump_qubit);

// Projector onto the half-excitation DFS or onto the codeword span.
struct CodespaceProjector {
  Eigen::Index dim = 0;
  bool diagonal = false;       // DFS projectors are diagonal
  Eigen::VectorXd diag;        // when diagonal
  Matrix matrix;               // dense form (always populated)

  static CodespaceProjector dfs(int n_physical);
  static CodespaceProjector code_span(const JumpCode& code);

  qcore::StateVector apply(const qcore::StateVector& state) const;
  // ||(I - P) psi|| <= tol
  bool contains(const qcore::StateVector& state, double tolerance) const;
};

// U_F = Z (x) I (x) Z (x) ... : Z on even positions. Compatible with phi = 0
// codes only when n_physical is a multiple of four.
qcore::PauliString flip_operator(int n_physical);

// True iff the code span is invariant under U_F (each codeword maps to +-
// itself rather than to its antisymmetric partner).
bool flip_preserves_code(const JumpCode& code);

// Logical-to-physical position map built up from swap layers.
struct PermutationTracker {
  std::vector<int> sigma;  // sigma[q] = current position of the qubit that started at q
  std::vector<std::pair<int, int>> history;  // applied transpositions, in order

  static PermutationTracker identity(int n);
};

struct SwapLayer {
  std::vector<int> permutation;                    // perm[q] = destination of qubit q
  std::vector<std::pair<int, int>> transpositions; // <= n-1 of them
};

// Uniform random permutation (Fisher-Yates), realized as transpositions and
// recorded in the tracker.
SwapLayer random_swap_layer(PermutationTracker& tracker, RngStream& rng, int n_physical);

// Basis action |b_0 b_1 ...> -> bit at position perm[q] of the output equals
// bit at position q of the input.
void apply_permutation_inplace(CVector& amps, int n_qubits, const std::vector<int>& perm);
qcore::StateVector apply_permutation(const qcore::StateVector& state,
                                     const std::vector<int>& perm);
Matrix permutation_matrix(const std::vector<int>& perm, int n_qubits);

// <A>_P = (1/n!) sum_P P^dag A P, exact over S_n (n <= 8; diagonal operators
// take an O(N) remap per permutation).
Matrix permutation_average(const Matrix& a, int n_physical);

struct McAverage {
  Matrix mean;
  double std_error = 0;  // of the Frobenius norm estimator
};
McAverage permutation_average_mc(const Matrix& a, int n_physical, int samples,
                                 RngStream& rng);

// Closed-form permutation-averaged constants of a Z/ZZ chain on the DFS:
//   c1 = -(1/(n-1)) sum_j J_j
//   c2 = sum d_i^2 - 2/(n-1) sum_{i<j} d_i d_j + sum J^2
//        - 2/(n-1) sum_j J_j J_{j+1} + 2 p_diff sum_{j<l-1} J_j J_l
//   p_diff = p'_+ - p'_- = 3/((n-1)(n-3))
// c3 is state dependent; the bounds [c1^2, c3_upper] are returned.
struct CodeConstants {
  double c1 = 0;
  double c2 = 0;
  double c3_lower = 0;  // c1^2
  double c3_upper = 0;
  double p_diff = 0;
};

CodeConstants code_constants(const perturb::ChainModel& chain, const JumpCode& code);

// Counting oracle for p'_+ - p'_-: enumerate all half-excitation words and
// position 4-subsets, tally the ZZZZ eigenvalue signs.
double p_diff_counting(int n_physical);

}  // namespace qstab::jumpcode
