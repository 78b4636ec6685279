#pragma once

#include <Eigen/Dense>

#include "qstab/qcore.hpp"
#include "qstab/rng.hpp"

namespace qstab::perturb {

// Linear-chain imperfection model (open ends): detunings on every qubit and
// nearest-neighbour couplings per Pauli axis. All entries in units of 1/t0.
struct ChainModel {
  int n_qubits = 0;
  Eigen::VectorXd detunings;   // size n_qubits
  Eigen::VectorXd jx, jy, jz;  // size n_qubits - 1 each

  static ChainModel zero(int n_qubits);
  bool z_only(double tolerance = 0.0) const;  // jx == jy == 0
};

// H0 = sum_i delta_i Z_i + sum_{K in {X,Y,Z}} sum_j J_{K,j} K_j K_{j+1}
Matrix build_chain_hamiltonian(const ChainModel& model);

// Diagonal of the Hamiltonian for a Z/ZZ-only chain (throws otherwise).
Eigen::VectorXd chain_diagonal(const ChainModel& model);

// Hermitian traceless sample with <V_jk V_lm> = delta_jm delta_kl / N.
struct GuePerturbation {
  Eigen::Index dim = 0;
  Matrix matrix;        // Hermitian, traceless
  double strength = 1;  // delta; the perturbation is strength * matrix
};

// Raw GUE draw before the traceless projection.
Matrix sample_gue_raw(Eigen::Index dim, RngStream& rng);
GuePerturbation sample_gue(Eigen::Index dim, RngStream& rng, double strength = 1.0);

// Detunings and Z couplings drawn i.i.d. uniform on [-sqrt(3) eps, sqrt(3) eps]
// (variance eps^2); X and Y couplings only when full_heisenberg is set.
ChainModel sample_uniform_chain(int n_qubits, double epsilon, RngStream& rng,
                                bool full_heisenberg = false);

}  // namespace qstab::perturb
