#include "qstab/perturb.hpp"

#include <cmath>
#include <stdexcept>

namespace qstab::perturb {

using qcore::Pauli;
using qcore::PauliString;

ChainModel ChainModel::zero(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("ChainModel: empty register");
  ChainModel m;
  m.n_qubits = n_qubits;
  m.detunings = Eigen::VectorXd::Zero(n_qubits);
  m.jx = Eigen::VectorXd::Zero(n_qubits - 1);
  m.jy = Eigen::VectorXd::Zero(n_qubits - 1);
  m.jz = Eigen::VectorXd::Zero(n_qubits - 1);
  return m;
}

bool ChainModel::z_only(double tolerance) const {
  if (jx.size() == 0 && jy.size() == 0) return true;
  return jx.cwiseAbs().maxCoeff() <= tolerance && jy.cwiseAbs().maxCoeff() <= tolerance;
}

namespace {

void check_sizes(const ChainModel& m) {
  if (m.n_qubits < 1) throw std::invalid_argument("ChainModel: empty register");
  if (m.detunings.size() != m.n_qubits)
    throw std::invalid_argument("ChainModel: detunings size != n_qubits");
  const Eigen::Index nc = m.n_qubits - 1;
  if (m.jx.size() != nc || m.jy.size() != nc || m.jz.size() != nc)
    throw std::invalid_argument("ChainModel: coupling arrays must have n_qubits-1 entries");
}

}  // namespace

Matrix build_chain_hamiltonian(const ChainModel& model) {
  check_sizes(model);
  const int n = model.n_qubits;
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    if (model.detunings[i] == 0.0) continue;
    h += model.detunings[i] * PauliString::single(n, i, Pauli::Z).to_matrix();
  }
  const Pauli axes[3] = {Pauli::X, Pauli::Y, Pauli::Z};
  const Eigen::VectorXd* coup[3] = {&model.jx, &model.jy, &model.jz};
  for (int a = 0; a < 3; ++a) {
    for (int j = 0; j + 1 < n; ++j) {
      const double c = (*coup[a])[j];
      if (c == 0.0) continue;
      PauliString pair =
          PauliString::single(n, j, axes[a]) * PauliString::single(n, j + 1, axes[a]);
      h += c * pair.to_matrix();
    }
  }
  return h;
}

Eigen::VectorXd chain_diagonal(const ChainModel& model) {
  check_sizes(model);
  if (!model.z_only())
    throw std::invalid_argument("chain_diagonal: model has X/Y couplings");
  const int n = model.n_qubits;
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    double e = 0;
    for (int q = 0; q < n; ++q) {
      const int z = 1 - 2 * qcore::bit_of(static_cast<std::uint64_t>(idx), n, q);
      e += model.detunings[q] * z;
    }
    for (int j = 0; j + 1 < n; ++j) {
      const int zj = 1 - 2 * qcore::bit_of(static_cast<std::uint64_t>(idx), n, j);
      const int zk = 1 - 2 * qcore::bit_of(static_cast<std::uint64_t>(idx), n, j + 1);
      e += model.jz[j] * zj * zk;
    }
    diag[idx] = e;
  }
  return diag;
}

Matrix sample_gue_raw(Eigen::Index dim, RngStream& rng) {
  if (dim < 2) throw std::invalid_argument("sample_gue: dim must be >= 2");
  Matrix v(dim, dim);
  const double diag_sd = 1.0 / std::sqrt(static_cast<double>(dim));
  const double off_sd = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) {
    v(j, j) = Complex(diag_sd * rng.normal(), 0.0);
    for (Eigen::Index k = j + 1; k < dim; ++k) {
      const Complex z(off_sd * rng.normal(), off_sd * rng.normal());
      v(j, k) = z;
      v(k, j) = std::conj(z);
    }
  }
  return v;
}

GuePerturbation sample_gue(Eigen::Index dim, RngStream& rng, double strength) {
  Matrix v = sample_gue_raw(dim, rng);
  const Complex tr = v.trace();
  v -= (tr / static_cast<double>(dim)) * Matrix::Identity(dim, dim);
  return GuePerturbation{dim, std::move(v), strength};
}

ChainModel sample_uniform_chain(int n_qubits, double epsilon, RngStream& rng,
                                bool full_heisenberg) {
  if (epsilon < 0) throw std::invalid_argument("sample_uniform_chain: epsilon < 0");
  ChainModel m = ChainModel::zero(n_qubits);
  const double half = std::sqrt(3.0) * epsilon;
  for (int i = 0; i < n_qubits; ++i) m.detunings[i] = rng.uniform(-half, half);
  for (int j = 0; j + 1 < n_qubits; ++j) m.jz[j] = rng.uniform(-half, half);
  if (full_heisenberg) {
    for (int j = 0; j + 1 < n_qubits; ++j) m.jx[j] = rng.uniform(-half, half);
    for (int j = 0; j + 1 < n_qubits; ++j) m.jy[j] = rng.uniform(-half, half);
  }
  return m;
}

}  // namespace qstab::perturb
