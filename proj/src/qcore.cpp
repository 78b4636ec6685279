#include "qstab/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qstab::qcore {

namespace {

constexpr Complex kImag{0.0, 1.0};

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool valid_phase(Complex p) {
  const Complex allowed[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (const auto& a : allowed)
    if (std::abs(p - a) < 1e-12) return true;
  return false;
}

}  // namespace

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

// ---------------------------------------------------------------------------
// PauliString

PauliString::PauliString(std::vector<Pauli> word, Complex phase)
    : word_(std::move(word)), phase_(phase) {
  require(!word_.empty(), "PauliString: empty word");
  require(valid_phase(phase_), "PauliString: phase must be one of {1,-1,i,-i}");
}

PauliString PauliString::identity(int n_qubits) {
  return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n_qubits), Pauli::I));
}

PauliString PauliString::single(int n_qubits, int qubit, Pauli p) {
  require(qubit >= 0 && qubit < n_qubits, "PauliString::single: qubit out of range");
  std::vector<Pauli> w(static_cast<std::size_t>(n_qubits), Pauli::I);
  w[static_cast<std::size_t>(qubit)] = p;
  return PauliString(std::move(w));
}

PauliString PauliString::random(int n_qubits, RngStream& rng) {
  std::vector<Pauli> w(static_cast<std::size_t>(n_qubits));
  for (auto& p : w) p = static_cast<Pauli>(rng.integer(4));
  return PauliString(std::move(w));
}

PauliString PauliString::parse(const std::string& word, Complex phase) {
  std::vector<Pauli> w;
  w.reserve(word.size());
  for (char c : word) {
    switch (c) {
      case 'I': w.push_back(Pauli::I); break;
      case 'X': w.push_back(Pauli::X); break;
      case 'Y': w.push_back(Pauli::Y); break;
      case 'Z': w.push_back(Pauli::Z); break;
      default: throw std::invalid_argument("PauliString::parse: bad letter");
    }
  }
  return PauliString(std::move(w), phase);
}

bool PauliString::identity_word() const {
  return std::all_of(word_.begin(), word_.end(),
                     [](Pauli p) { return p == Pauli::I; });
}

PauliString PauliString::adjoint() const {
  return PauliString(word_, std::conj(phase_));
}

PauliString PauliString::operator*(const PauliString& rhs) const {
  require(qubits() == rhs.qubits(), "PauliString: size mismatch in product");
  std::vector<Pauli> w(word_.size());
  Complex phase = phase_ * rhs.phase_;
  for (std::size_t q = 0; q < word_.size(); ++q) {
    const Pauli a = word_[q], b = rhs.word_[q];
    if (a == Pauli::I) {
      w[q] = b;
    } else if (b == Pauli::I) {
      w[q] = a;
    } else if (a == b) {
      w[q] = Pauli::I;
    } else {
      // XY=iZ, YZ=iX, ZX=iY and the reversed orders pick up -i.
      const int ia = static_cast<int>(a), ib = static_cast<int>(b);
      const int ic = 6 - ia - ib;  // the remaining letter
      w[q] = static_cast<Pauli>(ic);
      const bool cyclic = (ib - ia + 3) % 3 == 1;  // X->Y->Z->X
      phase *= cyclic ? kImag : -kImag;
    }
  }
  return PauliString(std::move(w), phase);
}

Complex PauliString::trace() const {
  if (!identity_word()) return Complex(0, 0);
  return phase_ * static_cast<double>(1ULL << qubits());
}

std::uint64_t PauliString::flip_mask() const {
  std::uint64_t mask = 0;
  const int n = qubits();
  for (int q = 0; q < n; ++q) {
    const Pauli p = word_[static_cast<std::size_t>(q)];
    if (p == Pauli::X || p == Pauli::Y) mask |= 1ULL << bit_position(n, q);
  }
  return mask;
}

Complex PauliString::amp_factor(std::uint64_t index) const {
  const int n = qubits();
  std::uint64_t sign_mask = 0;  // bits contributing (-1)^bit
  int n_y = 0;
  for (int q = 0; q < n; ++q) {
    const Pauli p = word_[static_cast<std::size_t>(q)];
    if (p == Pauli::Y || p == Pauli::Z) sign_mask |= 1ULL << bit_position(n, q);
    if (p == Pauli::Y) ++n_y;
  }
  Complex f = phase_;
  switch (n_y % 4) {  // i^{#Y}
    case 1: f *= kImag; break;
    case 2: f *= -1.0; break;
    case 3: f *= -kImag; break;
    default: break;
  }
  if (std::popcount(index & sign_mask) % 2 != 0) f = -f;
  return f;
}

void PauliString::apply(CVector& amps) const {
  const std::uint64_t n = static_cast<std::uint64_t>(amps.size());
  require(n == (1ULL << qubits()), "PauliString::apply: dimension mismatch");
  const std::uint64_t flip = flip_mask();
  CVector out(amps.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    out[static_cast<Eigen::Index>(i ^ flip)] =
        amp_factor(i) * amps[static_cast<Eigen::Index>(i)];
  }
  amps.swap(out);
}

Matrix PauliString::to_matrix() const {
  const std::uint64_t n = 1ULL << qubits();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const std::uint64_t flip = flip_mask();
  for (std::uint64_t i = 0; i < n; ++i) {
    m(static_cast<Eigen::Index>(i ^ flip), static_cast<Eigen::Index>(i)) = amp_factor(i);
  }
  return m;
}

std::string PauliString::str() const {
  std::string s;
  if (std::abs(phase_ - Complex(-1, 0)) < 1e-12) s += '-';
  else if (std::abs(phase_ - Complex(0, 1)) < 1e-12) s += "i*";
  else if (std::abs(phase_ - Complex(0, -1)) < 1e-12) s += "-i*";
  for (Pauli p : word_) s += pauli_char(p);
  return s;
}

std::vector<PauliString> pauli_basis(int n_qubits) {
  const std::uint64_t count = 1ULL << (2 * n_qubits);
  std::vector<PauliString> basis;
  basis.reserve(count);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::vector<Pauli> w(static_cast<std::size_t>(n_qubits));
    std::uint64_t c = code;
    for (int q = n_qubits - 1; q >= 0; --q) {
      w[static_cast<std::size_t>(q)] = static_cast<Pauli>(c & 3);
      c >>= 2;
    }
    basis.emplace_back(std::move(w));
  }
  return basis;
}

Complex pauli_matrix_trace(const PauliString& p, const Matrix& m) {
  const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t flip = p.flip_mask();
  Complex sum(0, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    // <i| P M |i> = P(i, i^flip) * M(i^flip, i)
    sum += p.amp_factor(i ^ flip) *
           m(static_cast<Eigen::Index>(i ^ flip), static_cast<Eigen::Index>(i));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  require(n_qubits >= 1 && n_qubits <= 24, "StateVector: bad qubit count");
  amps_ = CVector::Zero(static_cast<Eigen::Index>(1) << n_qubits);
  amps_[0] = Complex(1, 0);
}

StateVector::StateVector(int n_qubits, CVector amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  require(amps_.size() == (static_cast<Eigen::Index>(1) << n_qubits),
          "StateVector: amplitude count must be 2^n");
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index) {
  StateVector s(n_qubits);
  require(index < (1ULL << n_qubits), "StateVector::basis: index out of range");
  s.amps_[0] = Complex(0, 0);
  s.amps_[static_cast<Eigen::Index>(index)] = Complex(1, 0);
  return s;
}

void StateVector::normalize() {
  const double n = norm();
  require(n > 0, "StateVector::normalize: zero vector");
  amps_ /= n;
}

Complex StateVector::overlap(const StateVector& other) const {
  require(n_qubits_ == other.n_qubits_, "StateVector::overlap: size mismatch");
  return amps_.dot(other.amps_);  // Eigen dot conjugates the left factor
}

// ---------------------------------------------------------------------------
// Gate application

void apply_gate_inplace(CVector& amps, int n_qubits, const Matrix& op,
                        std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  require(k >= 1, "apply_gate: no targets");
  require(op.rows() == op.cols(), "apply_gate: operator must be square");
  require(op.rows() == (static_cast<Eigen::Index>(1) << k),
          "apply_gate: operator dimension != 2^targets");
  std::uint64_t tmask = 0;
  for (int q : targets) {
    require(q >= 0 && q < n_qubits, "apply_gate: target out of range");
    const std::uint64_t b = 1ULL << bit_position(n_qubits, q);
    require((tmask & b) == 0, "apply_gate: duplicate target");
    tmask |= b;
  }

  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  const int sub = 1 << k;
  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(sub));
  for (int l = 0; l < sub; ++l) {
    std::uint64_t off = 0;
    for (int j = 0; j < k; ++j) {
      if ((l >> (k - 1 - j)) & 1) off |= 1ULL << bit_position(n_qubits, targets[j]);
    }
    offsets[static_cast<std::size_t>(l)] = off;
  }

  CVector local(sub);
  for (std::uint64_t base = 0; base < dim; ++base) {
    if ((base & tmask) != 0) continue;  // enumerate target-bits-clear indices
    for (int l = 0; l < sub; ++l)
      local[l] = amps[static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(l)])];
    local = op * local;
    for (int l = 0; l < sub; ++l)
      amps[static_cast<Eigen::Index>(base | offsets[static_cast<std::size_t>(l)])] = local[l];
  }
}

StateVector apply_gate(const StateVector& state, const Matrix& op,
                       std::span<const int> targets) {
  StateVector out = state;
  apply_gate_inplace(out.amps(), out.qubits(), op, targets);
  return out;
}

StateVector apply_gate(const StateVector& state, const PauliString& op) {
  require(op.qubits() == state.qubits(), "apply_gate: Pauli width mismatch");
  StateVector out = state;
  op.apply(out.amps());
  return out;
}

Matrix embed_operator(const Matrix& op, std::span<const int> targets, int n_qubits) {
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
  Matrix full(dim, dim);
  CVector col = CVector::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    col.setZero();
    col[j] = Complex(1, 0);
    apply_gate_inplace(col, n_qubits, op, targets);
    full.col(j) = col;
  }
  return full;
}

// ---------------------------------------------------------------------------
// Operator helpers

Matrix identity_matrix(Eigen::Index dim) { return Matrix::Identity(dim, dim); }

Matrix pauli_matrix(Pauli p) {
  Matrix m(2, 2);
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -kImag, kImag, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_unitary(const Matrix& u, double tolerance) {
  if (u.rows() != u.cols()) return false;
  return max_abs(u.adjoint() * u - identity_matrix(u.rows())) < tolerance;
}

bool is_hermitian(const Matrix& h, double tolerance) {
  if (h.rows() != h.cols()) return false;
  return max_abs(h - h.adjoint()) < tolerance;
}

Matrix unitary_exp(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("unitary_exp: eigendecomposition failed");
  const auto& evals = es.eigenvalues();
  CVector phases(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    phases[i] = std::exp(-kImag * evals[i]);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix unitary_power(const Matrix& u, int p) {
  if (p == 0) return identity_matrix(u.rows());
  Matrix base = p > 0 ? u : Matrix(u.adjoint());
  int e = std::abs(p);
  Matrix result = identity_matrix(u.rows());
  while (e > 0) {
    if (e & 1) result = base * result;
    base = base * base;
    e >>= 1;
  }
  return result;
}

Complex frobenius_inner(const Matrix& a, const Matrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double operator_two_norm(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("operator_two_norm: not square");
  if (is_hermitian(h, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Matrix> svd(h);
  return svd.singularValues()(0);
}

double trace_distance(const Matrix& a, const Matrix& b) {
  Matrix d = a - b;
  d = Matrix(0.5 * (d + d.adjoint()));  // symmetrize away roundoff
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double entanglement_fidelity(const Matrix& u_ideal, const Matrix& u_actual) {
  if (u_ideal.rows() != u_actual.rows() || u_ideal.cols() != u_actual.cols())
    throw std::invalid_argument("entanglement_fidelity: dimension mismatch");
  const double n = static_cast<double>(u_ideal.rows());
  const Complex a = frobenius_inner(u_ideal, u_actual) / n;
  return std::norm(a);
}

double average_fidelity_from_entanglement(double f_e, double dim) {
  return (dim * f_e + 1.0) / (dim + 1.0);
}

StateVector random_state(int n_qubits, RngStream& rng) {
  CVector amps(static_cast<Eigen::Index>(1) << n_qubits);
  for (Eigen::Index i = 0; i < amps.size(); ++i)
    amps[i] = Complex(rng.normal(), rng.normal());
  amps /= amps.norm();
  return StateVector(n_qubits, std::move(amps));
}

Matrix hadamard() {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

Matrix cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = Complex(1, 0);
  return m;
}

Matrix controlled_phase(double angle) {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = std::exp(kImag * angle);
  return m;
}

Matrix swap_gate() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = Complex(1, 0);
  return m;
}

}  // namespace qstab::qcore
