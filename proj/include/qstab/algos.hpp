#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qstab/qcore.hpp"
#include "qstab/rng.hpp"

namespace qstab::algos {

// One labeled gate: either a local dense operator on explicit targets or a
// full-register Pauli string (used for the PAREC pulses).
struct Gate {
  std::string label;
  Matrix op;                                 // 2^k x 2^k local operator
  std::vector<int> targets;                  // target 0 = MSB of local index
  std::optional<qcore::PauliString> pauli;   // full width when set

  bool is_pauli() const { return pauli.has_value(); }
  Matrix embedded(int n_qubits) const;
  Complex embedded_trace(int n_qubits) const;
  void left_multiply(Matrix& m, int n_qubits) const;  // m <- G * m
};

struct ParecInfo {
  int iterations = 0;
  int base_gates = 0;                                   // n_g of the source
  qcore::PauliString final_frame;                       // r_{n_g} of the last iteration
  std::vector<qcore::PauliString> frame_after_iteration;
  std::vector<qcore::PauliString> pulses;               // r_i per slot, iteration-major
};

// Ordered gate list; gates[0] acts first. For PAREC-transformed sequences the
// trailing frame closure r^dag is tracked in `parec` and included in product().
struct GateSequence {
  int n_qubits = 0;
  std::vector<Gate> gates;
  std::optional<ParecInfo> parec;
  std::vector<Gate> base_gates;  // retained by parec_transform

  int size() const { return static_cast<int>(gates.size()); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(1) << n_qubits; }
  Matrix product() const;
  // P_0 = I, P_i = G_i ... G_1 (over `gates`, no frame closure).
  std::vector<Matrix> prefix_products() const;
};

// Quantum Fourier transform as Hadamards, controlled-phase gates with angles
// pi/2^k, and floor(n/2) terminal swaps; gate count floor(n(n+2)/2) and the
// product is the exact DFT matrix (MSB-first index convention).
GateSequence build_qft(int n_qubits, bool include_swaps = true);

// 2 n_g t gates: pulses r_i r_{i-1}^dag interleaved with conjugated gates
// r_i U_i r_i^dag, plus the closing frame pulse. The noiseless product equals
// U^t exactly. Pulses are drawn uniformly from the full Pauli basis unless an
// explicit set is given.
GateSequence parec_transform(const GateSequence& seq, int iterations, RngStream& rng,
                             const std::vector<qcore::PauliString>* set = nullptr);

// Exact product of exp(-i left_j) U_j exp(-i right_j); an empty matrix in
// either list stands for a vanishing perturbation.
Matrix perturbed_product(const GateSequence& seq, const std::vector<Matrix>& left,
                         const std::vector<Matrix>& right);

struct SidePerturbations {
  std::vector<Matrix> left;   // size n_g, empty entries = zero
  std::vector<Matrix> right;
};

// Second-order perturbative fidelity amplitude A(t) for t iterations of the
// sequence with per-gate, per-side perturbations (per iteration when the
// vector form is used). All perturbations must be traceless.
Complex fidelity_amplitude_second_order(const GateSequence& seq,
                                        const std::vector<SidePerturbations>& per_iteration);
Complex fidelity_amplitude_second_order(const GateSequence& seq,
                                        const SidePerturbations& shared, int iterations);

// Static-imperfection specialization (left-side dh on every gate): the
// second-order entanglement fidelity 1 - t sum_jk C(j,k) - cross-iteration
// terms, evaluated directly.
double fidelity_second_order_static(const GateSequence& seq, const Matrix& dh,
                                    int iterations);

// Correlation matrices are stored in the normalized convention
// (<C(j,k)> + 1/N^2)/delta^2; raw() recovers <C(j,k)>.
struct CorrelationMatrix {
  Eigen::MatrixXd normalized;
  double delta = 0;
  Eigen::Index dim = 0;  // N

  Eigen::MatrixXd raw() const;
};

// Closed-form GUE ensemble average, Eq.-exact: normalized entry (j,k) equals
// |tr{U_{j..1} U^dag_{1..k}}/N|^2. Prefix products are cached internally.
CorrelationMatrix correlation_matrix_gue_average(const GateSequence& seq, double delta);

struct ParecCorrelation {
  CorrelationMatrix monte_carlo;  // mean over Pauli draws
  CorrelationMatrix expected;     // closed-form pattern
  double expected_fidelity = 1;   // 1 - sum of expected raw entries
  double fidelity_lower_bound = 1;  // 1 - 4 n_g delta^2 (1 - 1/N^2)
  int samples = 0;
};

// Monte-Carlo average of the GUE-averaged correlation matrix over fresh Pauli
// draws for a PAREC-transformed sequence (single iteration). Also returns the
// closed-form expected pattern: diagonal 1 - 1/N^2, |tr U_j / N|^2 - 1/N^2
// next to each conjugated gate, zero elsewhere.
ParecCorrelation parec_correlation_average(const GateSequence& parec_seq, double delta,
                                           int samples, RngStream& rng);

// Closed-form pattern alone (usable at any register size).
CorrelationMatrix expected_parec_pattern(const GateSequence& parec_seq, double delta);

}  // namespace qstab::algos
