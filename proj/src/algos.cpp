#include "qstab/algos.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qstab::algos {

using qcore::Pauli;
using qcore::PauliString;

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Sub-word of a full-register Pauli string on the given targets, phase +1.
PauliString restrict_to(const PauliString& p, const std::vector<int>& targets) {
  std::vector<Pauli> w;
  w.reserve(targets.size());
  for (int q : targets) w.push_back(p.op(q));
  return PauliString(std::move(w));
}

bool traceless(const Matrix& m) {
  return std::abs(m.trace()) <= 1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff() *
                                                         static_cast<double>(m.rows()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Gate / GateSequence

Matrix Gate::embedded(int n_qubits) const {
  if (is_pauli()) return pauli->to_matrix();
  return qcore::embed_operator(op, targets, n_qubits);
}

Complex Gate::embedded_trace(int n_qubits) const {
  if (is_pauli()) return pauli->trace();
  const int k = static_cast<int>(targets.size());
  const double rest = static_cast<double>(1ULL << (n_qubits - k));
  return op.trace() * rest;
}

void Gate::left_multiply(Matrix& m, int n_qubits) const {
  if (is_pauli()) {
    const std::uint64_t flip = pauli->flip_mask();
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto src = static_cast<std::uint64_t>(i);
      out.row(static_cast<Eigen::Index>(src ^ flip)) = pauli->amp_factor(src) * m.row(i);
    }
    m.swap(out);
    return;
  }
  CVector col(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    col = m.col(j);
    qcore::apply_gate_inplace(col, n_qubits, op, targets);
    m.col(j) = col;
  }
}

Matrix GateSequence::product() const {
  Matrix u = Matrix::Identity(dim(), dim());
  for (const auto& g : gates) g.left_multiply(u, n_qubits);
  if (parec) {
    Gate closure;
    closure.pauli = parec->final_frame.adjoint();
    closure.left_multiply(u, n_qubits);
  }
  return u;
}

std::vector<Matrix> GateSequence::prefix_products() const {
  std::vector<Matrix> prefixes;
  prefixes.reserve(gates.size() + 1);
  Matrix u = Matrix::Identity(dim(), dim());
  prefixes.push_back(u);
  for (const auto& g : gates) {
    g.left_multiply(u, n_qubits);
    prefixes.push_back(u);
  }
  return prefixes;
}

// ---------------------------------------------------------------------------
// QFT

GateSequence build_qft(int n_qubits, bool include_swaps) {
  require(n_qubits >= 1, "build_qft: n_qubits must be >= 1");
  GateSequence seq;
  seq.n_qubits = n_qubits;
  for (int q = 0; q < n_qubits; ++q) {
    Gate h;
    h.label = "H" + std::to_string(q);
    h.op = qcore::hadamard();
    h.targets = {q};
    seq.gates.push_back(std::move(h));
    for (int l = q + 1; l < n_qubits; ++l) {
      Gate cp;
      cp.label = "CP" + std::to_string(q) + "," + std::to_string(l);
      cp.op = qcore::controlled_phase(kPi / std::pow(2.0, l - q));
      cp.targets = {q, l};
      seq.gates.push_back(std::move(cp));
    }
  }
  if (include_swaps) {
    for (int q = 0; q < n_qubits / 2; ++q) {
      Gate sw;
      sw.label = "SWAP" + std::to_string(q) + "," + std::to_string(n_qubits - 1 - q);
      sw.op = qcore::swap_gate();
      sw.targets = {q, n_qubits - 1 - q};
      seq.gates.push_back(std::move(sw));
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// PAREC

GateSequence parec_transform(const GateSequence& seq, int iterations, RngStream& rng,
                             const std::vector<PauliString>* set) {
  require(iterations >= 1, "parec_transform: iterations must be >= 1");
  require(!seq.parec, "parec_transform: sequence is already transformed");
  const int n = seq.n_qubits;
  const int n_g = seq.size();

  auto draw = [&]() -> PauliString {
    if (!set) return PauliString::random(n, rng);
    require(!set->empty(), "parec_transform: empty decoupling set");
    return (*set)[static_cast<std::size_t>(rng.integer(set->size()))];
  };

  GateSequence out;
  out.n_qubits = n;
  out.base_gates = seq.gates;
  out.gates.reserve(static_cast<std::size_t>(2 * n_g * iterations));
  ParecInfo info;
  info.iterations = iterations;
  info.base_gates = n_g;

  PauliString prev = PauliString::identity(n);  // r_0 of the first iteration
  for (int tau = 1; tau <= iterations; ++tau) {
    for (int i = 0; i < n_g; ++i) {
      const PauliString r = draw();
      info.pulses.push_back(r);

      Gate pulse;
      pulse.label = "r" + std::to_string(tau) + "." + std::to_string(i + 1);
      pulse.pauli = r * prev.adjoint();
      out.gates.push_back(std::move(pulse));

      const Gate& base = seq.gates[static_cast<std::size_t>(i)];
      Gate conj;
      conj.label = "~" + base.label;
      if (base.is_pauli()) {
        conj.pauli = r * *base.pauli * r.adjoint();
      } else {
        const Matrix rm = restrict_to(r, base.targets).to_matrix();
        conj.op = rm * base.op * rm.adjoint();
        conj.targets = base.targets;
      }
      out.gates.push_back(std::move(conj));

      prev = r;
    }
    info.frame_after_iteration.push_back(prev);
  }
  info.final_frame = prev;
  out.parec = std::move(info);
  return out;
}

Matrix perturbed_product(const GateSequence& seq, const std::vector<Matrix>& left,
                         const std::vector<Matrix>& right) {
  const auto n_g = static_cast<std::size_t>(seq.size());
  require(left.size() == n_g && right.size() == n_g,
          "perturbed_product: perturbation list length mismatch");
  const Eigen::Index dim = seq.dim();
  Matrix w = Matrix::Identity(dim, dim);
  for (std::size_t j = 0; j < n_g; ++j) {
    if (right[j].size() != 0) {
      require(right[j].rows() == dim, "perturbed_product: right dim mismatch");
      w = qcore::unitary_exp(right[j]) * w;
    }
    seq.gates[j].left_multiply(w, seq.n_qubits);
    if (left[j].size() != 0) {
      require(left[j].rows() == dim, "perturbed_product: left dim mismatch");
      w = qcore::unitary_exp(left[j]) * w;
    }
  }
  if (seq.parec) {
    Gate closure;
    closure.pauli = seq.parec->final_frame.adjoint();
    closure.left_multiply(w, seq.n_qubits);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Second-order fidelity amplitude (time-dependent perturbation theory)

Complex fidelity_amplitude_second_order(const GateSequence& seq,
                                        const std::vector<SidePerturbations>& per_iter) {
  const int t = static_cast<int>(per_iter.size());
  require(t >= 1, "fidelity_amplitude_second_order: need at least one iteration");
  const auto n_g = static_cast<std::size_t>(seq.size());
  const Eigen::Index dim = seq.dim();
  const double n = static_cast<double>(dim);

  for (const auto& p : per_iter) {
    require(p.left.size() == n_g && p.right.size() == n_g,
            "fidelity_amplitude_second_order: perturbation list length mismatch");
    for (const auto& m : p.left)
      if (m.size() != 0) require(traceless(m), "perturbations must be traceless");
    for (const auto& m : p.right)
      if (m.size() != 0) require(traceless(m), "perturbations must be traceless");
  }

  const std::vector<Matrix> prefix = seq.prefix_products();
  const Matrix u_full = seq.parec ? seq.product() : prefix.back();

  // Conjugate every perturbation into the frame of the start of its
  // iteration: K = P_i^dag dH P_i with i = j for the left side, j-1 for the
  // right side. Indexed [tau][j][side], side 0 = left.
  auto conj_at = [&](const Matrix& dh, std::size_t i) -> Matrix {
    return prefix[i].adjoint() * dh * prefix[i];
  };
  std::vector<std::vector<std::array<Matrix, 2>>> k(static_cast<std::size_t>(t));
  for (int tau = 0; tau < t; ++tau) {
    auto& row = k[static_cast<std::size_t>(tau)];
    row.resize(n_g);
    for (std::size_t j = 0; j < n_g; ++j) {
      const Matrix& l = per_iter[static_cast<std::size_t>(tau)].left[j];
      const Matrix& r = per_iter[static_cast<std::size_t>(tau)].right[j];
      if (l.size() != 0) row[j][0] = conj_at(l, j + 1);
      if (r.size() != 0) row[j][1] = conj_at(r, j);
    }
  }

  Complex a(1.0, 0.0);

  // Single-gate terms: -(i tr{dH} + tr{dH^2}/2)/N per slot.
  for (int tau = 0; tau < t; ++tau) {
    for (std::size_t j = 0; j < n_g; ++j) {
      for (int side = 0; side < 2; ++side) {
        const Matrix& dh = side == 0 ? per_iter[static_cast<std::size_t>(tau)].left[j]
                                     : per_iter[static_cast<std::size_t>(tau)].right[j];
        if (dh.size() == 0) continue;
        a -= 0.5 * qcore::frobenius_inner(Matrix(dh.adjoint()), dh) / n;
      }
    }
  }

  // Same-iteration cross terms, j > k over both sides.
  for (int tau = 0; tau < t; ++tau) {
    const auto& row = k[static_cast<std::size_t>(tau)];
    for (std::size_t j = 1; j < n_g; ++j) {
      for (std::size_t kk = 0; kk < j; ++kk) {
        for (int sj = 0; sj < 2; ++sj) {
          if (row[j][static_cast<std::size_t>(sj)].size() == 0) continue;
          for (int sk = 0; sk < 2; ++sk) {
            if (row[kk][static_cast<std::size_t>(sk)].size() == 0) continue;
            a -= (row[j][static_cast<std::size_t>(sj)] *
                  row[kk][static_cast<std::size_t>(sk)])
                     .trace() /
                 n;
          }
        }
      }
    }
  }

  // Left-right cross term on the same gate.
  for (int tau = 0; tau < t; ++tau) {
    for (std::size_t j = 0; j < n_g; ++j) {
      const Matrix& l = per_iter[static_cast<std::size_t>(tau)].left[j];
      const Matrix& r = per_iter[static_cast<std::size_t>(tau)].right[j];
      if (l.size() == 0 || r.size() == 0) continue;
      const Matrix uj = seq.gates[j].embedded(seq.n_qubits);
      a -= (uj.adjoint() * l * uj * r).trace() / n;
    }
  }

  // Cross-iteration terms tau1 > tau2, full j,k square, both sides.
  for (int tau1 = 1; tau1 < t; ++tau1) {
    for (int tau2 = 0; tau2 < tau1; ++tau2) {
      const Matrix u_gap = qcore::unitary_power(u_full, tau1 - tau2);
      const Matrix u_gap_inv = u_gap.adjoint();
      const auto& row1 = k[static_cast<std::size_t>(tau1)];
      const auto& row2 = k[static_cast<std::size_t>(tau2)];
      for (std::size_t j = 0; j < n_g; ++j) {
        for (int sj = 0; sj < 2; ++sj) {
          const Matrix& kj = row1[j][static_cast<std::size_t>(sj)];
          if (kj.size() == 0) continue;
          const Matrix left = u_gap_inv * kj * u_gap;
          for (std::size_t kk = 0; kk < n_g; ++kk) {
            for (int sk = 0; sk < 2; ++sk) {
              const Matrix& kkm = row2[kk][static_cast<std::size_t>(sk)];
              if (kkm.size() == 0) continue;
              a -= (left * kkm).trace() / n;
            }
          }
        }
      }
    }
  }

  return a;
}

Complex fidelity_amplitude_second_order(const GateSequence& seq,
                                        const SidePerturbations& shared, int iterations) {
  std::vector<SidePerturbations> per(static_cast<std::size_t>(iterations), shared);
  return fidelity_amplitude_second_order(seq, per);
}

double fidelity_second_order_static(const GateSequence& seq, const Matrix& dh,
                                    int iterations) {
  require(iterations >= 1, "fidelity_second_order_static: iterations must be >= 1");
  require(traceless(dh), "fidelity_second_order_static: dH must be traceless");
  const auto n_g = static_cast<std::size_t>(seq.size());
  const double n = static_cast<double>(seq.dim());
  const std::vector<Matrix> prefix = seq.prefix_products();
  const Matrix u_full = prefix.back();

  std::vector<Matrix> tilde(n_g);
  for (std::size_t j = 0; j < n_g; ++j)
    tilde[j] = prefix[j + 1].adjoint() * dh * prefix[j + 1];

  double f = 1.0;
  // Same-iteration block: t * sum_{j,k} tr{A_j A_k}/N.
  double same = 0.0;
  for (std::size_t j = 0; j < n_g; ++j)
    for (std::size_t kk = 0; kk < n_g; ++kk)
      same += (tilde[j] * tilde[kk]).trace().real();
  f -= iterations * same / n;

  // Cross-iteration block: 2 sum_{tau} (t - tau) sum_{j,k} tr{U^-tau A_j U^tau A_k}/N.
  for (int tau = 1; tau < iterations; ++tau) {
    const Matrix u_gap = qcore::unitary_power(u_full, tau);
    double cross = 0.0;
    for (std::size_t j = 0; j < n_g; ++j) {
      const Matrix moved = u_gap.adjoint() * tilde[j] * u_gap;
      for (std::size_t kk = 0; kk < n_g; ++kk)
        cross += (moved * tilde[kk]).trace().real();
    }
    f -= 2.0 * (iterations - tau) * cross / n;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Correlation matrices

Eigen::MatrixXd CorrelationMatrix::raw() const {
  const double inv_n2 = 1.0 / (static_cast<double>(dim) * static_cast<double>(dim));
  return delta * delta * (normalized.array() - inv_n2).matrix();
}

CorrelationMatrix correlation_matrix_gue_average(const GateSequence& seq, double delta) {
  const int n_g = seq.size();
  const double n = static_cast<double>(seq.dim());
  const std::vector<Matrix> prefix = seq.prefix_products();

  CorrelationMatrix cm;
  cm.delta = delta;
  cm.dim = seq.dim();
  cm.normalized.resize(n_g, n_g);
  for (int j = 0; j < n_g; ++j) {
    // tr{P_j P_j^dag} = N identically for unitary prefixes
    cm.normalized(j, j) = 1.0;
    for (int kk = 0; kk < j; ++kk) {
      // tr{P_j P_k^dag} as a Frobenius inner product
      const Complex tr = qcore::frobenius_inner(prefix[static_cast<std::size_t>(kk) + 1],
                                                prefix[static_cast<std::size_t>(j) + 1]);
      const double v = std::norm(tr / n);
      cm.normalized(j, kk) = v;
      cm.normalized(kk, j) = v;
    }
  }
  return cm;
}

namespace {

const ParecInfo& parec_info_for_correlation(const GateSequence& seq) {
  if (!seq.parec)
    throw std::invalid_argument("parec correlation: sequence is not PAREC-transformed");
  if (seq.parec->iterations != 1)
    throw std::invalid_argument("parec correlation: single-iteration layout required");
  return *seq.parec;
}

}  // namespace

CorrelationMatrix expected_parec_pattern(const GateSequence& parec_seq, double delta) {
  const ParecInfo& info = parec_info_for_correlation(parec_seq);
  const int n_g = info.base_gates;
  const int total = 2 * n_g;
  const double n = static_cast<double>(parec_seq.dim());
  const double inv_n2 = 1.0 / (n * n);

  CorrelationMatrix cm;
  cm.delta = delta;
  cm.dim = parec_seq.dim();
  cm.normalized = Eigen::MatrixXd::Constant(total, total, inv_n2);
  for (int j = 0; j < total; ++j) cm.normalized(j, j) = 1.0;
  for (int m = 1; m <= n_g; ++m) {
    const Complex tr = parec_seq.base_gates[static_cast<std::size_t>(m - 1)].embedded_trace(
        parec_seq.n_qubits);
    const double v = std::norm(tr / n);
    cm.normalized(2 * m - 1, 2 * m - 2) = v;  // (j even, k = j - 1), 0-based
    cm.normalized(2 * m - 2, 2 * m - 1) = v;
  }
  return cm;
}

ParecCorrelation parec_correlation_average(const GateSequence& parec_seq, double delta,
                                           int samples, RngStream& rng) {
  const ParecInfo& info = parec_info_for_correlation(parec_seq);
  require(samples >= 1, "parec_correlation_average: samples must be >= 1");
  const int n_g = info.base_gates;
  const int total = 2 * n_g;
  const int n_qubits = parec_seq.n_qubits;
  const Eigen::Index dim = parec_seq.dim();
  const double n = static_cast<double>(dim);

  // Pairwise products of base-sequence prefixes; the transformed prefix after
  // slot g is a Pauli times one of these, so every correlation entry is an
  // O(N) Pauli-weighted trace of a cached product.
  const double mem =
      static_cast<double>(n_g + 1) * (n_g + 1) * static_cast<double>(dim) * dim * 16.0;
  require(mem < 1.5e9, "parec_correlation_average: register too large for MC path");

  GateSequence base;
  base.n_qubits = n_qubits;
  base.gates = parec_seq.base_gates;
  const std::vector<Matrix> prefix = base.prefix_products();
  std::vector<std::vector<Matrix>> pair(static_cast<std::size_t>(n_g + 1));
  for (int x = 0; x <= n_g; ++x) {
    pair[static_cast<std::size_t>(x)].resize(static_cast<std::size_t>(n_g + 1));
    for (int y = 0; y <= n_g; ++y)
      pair[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          prefix[static_cast<std::size_t>(x)] *
          prefix[static_cast<std::size_t>(y)].adjoint();
  }

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(total, total);
  std::vector<PauliString> r(static_cast<std::size_t>(n_g), PauliString::identity(n_qubits));
  for (int s = 0; s < samples; ++s) {
    for (auto& p : r) p = PauliString::random(n_qubits, rng);
    // slot g (1-based): pauli index a(g) = ceil(g/2), base prefix x(g) = g/2
    for (int g = 1; g <= total; ++g) {
      const int ag = (g + 1) / 2, xg = g / 2;
      for (int h = 1; h <= g; ++h) {
        const int ah = (h + 1) / 2, xh = h / 2;
        const PauliString cross =
            r[static_cast<std::size_t>(ah - 1)].adjoint() * r[static_cast<std::size_t>(ag - 1)];
        const Complex tr = qcore::pauli_matrix_trace(
            cross, pair[static_cast<std::size_t>(xg)][static_cast<std::size_t>(xh)]);
        const double v = std::norm(tr / n);
        acc(g - 1, h - 1) += v;
        if (g != h) acc(h - 1, g - 1) += v;
      }
    }
  }

  ParecCorrelation out;
  out.samples = samples;
  out.monte_carlo.delta = delta;
  out.monte_carlo.dim = dim;
  out.monte_carlo.normalized = acc / static_cast<double>(samples);
  out.expected = expected_parec_pattern(parec_seq, delta);
  out.expected_fidelity = 1.0 - out.expected.raw().sum();
  out.fidelity_lower_bound = 1.0 - 4.0 * n_g * delta * delta * (1.0 - 1.0 / (n * n));
  return out;
}

}  // namespace qstab::algos
