#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qstab/rng.hpp"
#include "qstab/tolerances.hpp"

namespace qstab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

}  // namespace qstab

namespace qstab::qcore {

// Qubit convention used throughout: qubit 0 is the most significant bit of
// the computational basis index, so |q0 q1 ... q_{n-1}> maps to the integer
// q0*2^{n-1} + ... + q_{n-1}.
inline int bit_position(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

inline int bit_of(std::uint64_t index, int n_qubits, int qubit) {
  return static_cast<int>((index >> bit_position(n_qubits, qubit)) & 1ULL);
}

// ---------------------------------------------------------------------------
// Pauli strings

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char pauli_char(Pauli p);

// Tensor word over {I,X,Y,Z} with a tracked phase in {1,-1,i,-i}.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> word, Complex phase = Complex(1, 0));

  static PauliString identity(int n_qubits);
  static PauliString single(int n_qubits, int qubit, Pauli p);
  // Uniform draw over the 4^n words, phase +1.
  static PauliString random(int n_qubits, RngStream& rng);
  // Parse e.g. "XIZY".
  static PauliString parse(const std::string& word, Complex phase = Complex(1, 0));

  int qubits() const { return static_cast<int>(word_.size()); }
  Pauli op(int qubit) const { return word_[static_cast<std::size_t>(qubit)]; }
  Complex phase() const { return phase_; }
  bool identity_word() const;

  PauliString adjoint() const;
  PauliString operator*(const PauliString& rhs) const;  // this applied after rhs
  bool same_word(const PauliString& rhs) const { return word_ == rhs.word_; }

  // Trace of the full 2^n x 2^n matrix: phase * 2^n for the identity word,
  // zero otherwise.
  Complex trace() const;

  Matrix to_matrix() const;
  std::string str() const;

  // In-place action on a full-register amplitude vector.
  void apply(CVector& amps) const;

  // Bits flipped by the word (X and Y positions) within an n-qubit index.
  std::uint64_t flip_mask() const;
  // <i^flip | P | i> for basis index i (includes the global phase).
  Complex amp_factor(std::uint64_t index) const;

 private:
  std::vector<Pauli> word_;
  Complex phase_{1.0, 0.0};
};

// All 4^n tensor words with phase +1, ordered lexicographically (I<X<Y<Z).
std::vector<PauliString> pauli_basis(int n_qubits);

// tr{P * M} in O(dim) using the one-nonzero-per-row structure of P.
Complex pauli_matrix_trace(const PauliString& p, const Matrix& m);

// ---------------------------------------------------------------------------
// States

class StateVector {
 public:
  explicit StateVector(int n_qubits);  // |0...0>
  StateVector(int n_qubits, CVector amplitudes);

  static StateVector basis(int n_qubits, std::uint64_t index);

  int qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  const CVector& amps() const { return amps_; }
  CVector& amps() { return amps_; }

  double norm() const { return amps_.norm(); }
  void normalize();
  Complex overlap(const StateVector& other) const;  // <this|other>

 private:
  int n_qubits_ = 0;
  CVector amps_;
};

// ---------------------------------------------------------------------------
// Gate application

// U embedded on `targets` (target 0 = most significant bit of the local
// operator index), identity elsewhere. Throws on duplicate/out-of-range
// targets or a dimension mismatch.
StateVector apply_gate(const StateVector& state, const Matrix& op,
                       std::span<const int> targets);
StateVector apply_gate(const StateVector& state, const PauliString& op);

void apply_gate_inplace(CVector& amps, int n_qubits, const Matrix& op,
                        std::span<const int> targets);

// Dense N x N embedding of a local operator.
Matrix embed_operator(const Matrix& op, std::span<const int> targets, int n_qubits);

// ---------------------------------------------------------------------------
// Operator helpers

Matrix identity_matrix(Eigen::Index dim);
Matrix pauli_matrix(Pauli p);
Matrix kron(const Matrix& a, const Matrix& b);

bool is_unitary(const Matrix& u, double tolerance = tol::kUnitary);
bool is_hermitian(const Matrix& h, double tolerance = tol::kHermitian);

// exp(-i H) for Hermitian H, by exact eigendecomposition.
Matrix unitary_exp(const Matrix& h);

// U^p for unitary U; negative powers use the adjoint.
Matrix unitary_power(const Matrix& u, int p);

// tr{A^dag B}
Complex frobenius_inner(const Matrix& a, const Matrix& b);

double max_abs(const Matrix& m);

// Largest singular value; Hermitian input takes the eigenvalue route.
double operator_two_norm(const Matrix& h);

// (1/2) * sum |eig(A - B)| for Hermitian A, B.
double trace_distance(const Matrix& a, const Matrix& b);

// |tr{U_ideal^dag U_actual} / N|^2
double entanglement_fidelity(const Matrix& u_ideal, const Matrix& u_actual);

// (N F_e + 1) / (N + 1)
double average_fidelity_from_entanglement(double f_e, double dim);

// Haar-random pure state (Gaussian components, normalized).
StateVector random_state(int n_qubits, RngStream& rng);

// Common gates.
Matrix hadamard();
Matrix cnot();                          // control = qubit 0, target = qubit 1
Matrix controlled_phase(double angle);  // diag(1,1,1,e^{i angle})
Matrix swap_gate();

}  // namespace qstab::qcore
