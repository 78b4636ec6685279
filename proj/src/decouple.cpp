#include "qstab/decouple.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qstab/perturb.hpp"

namespace qstab::decouple {

DecouplingSet DecouplingSet::from_paulis(const std::vector<qcore::PauliString>& paulis) {
  DecouplingSet set;
  set.elements.reserve(paulis.size());
  set.labels.reserve(paulis.size());
  for (const auto& p : paulis) {
    set.elements.push_back(p.to_matrix());
    set.labels.push_back(p.str());
  }
  return set;
}

DecouplingSet DecouplingSet::pauli_annihilator(int n_qubits) {
  return from_paulis(qcore::pauli_basis(n_qubits));
}

void DecouplingSet::validate() const {
  if (elements.empty()) throw std::invalid_argument("DecouplingSet: empty");
  const Eigen::Index d = elements.front().rows();
  for (const auto& g : elements) {
    if (g.rows() != d || g.cols() != d)
      throw std::invalid_argument("DecouplingSet: mixed dimensions");
    if (!qcore::is_unitary(g))
      throw std::invalid_argument("DecouplingSet: element not unitary");
  }
}

std::string kind_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::PDD: return "PDD";
    case ScheduleKind::SDD: return "SDD";
    case ScheduleKind::NRD: return "NRD";
    case ScheduleKind::EMD: return "EMD";
    case ScheduleKind::SEMD: return "SEMD";
    case ScheduleKind::RandomPath: return "RANDOM_PATH";
  }
  return "?";
}

ScheduleKind kind_from_name(const std::string& name) {
  if (name == "PDD") return ScheduleKind::PDD;
  if (name == "SDD") return ScheduleKind::SDD;
  if (name == "NRD") return ScheduleKind::NRD;
  if (name == "EMD") return ScheduleKind::EMD;
  if (name == "SEMD") return ScheduleKind::SEMD;
  if (name == "RANDOM_PATH") return ScheduleKind::RandomPath;
  throw std::invalid_argument("unknown schedule kind: " + name);
}

int DecouplingSchedule::cycle_steps() const {
  const int n_c = set.size();
  const bool symmetric = kind == ScheduleKind::SDD || kind == ScheduleKind::SEMD;
  return symmetric ? 2 * n_c : n_c;
}

void DecouplingSchedule::validate() const {
  if (dt <= 0) throw std::invalid_argument("DecouplingSchedule: dt must be > 0");
  set.validate();
  const bool embedded = kind == ScheduleKind::EMD || kind == ScheduleKind::SEMD;
  if (embedded) {
    if (!inner) throw std::invalid_argument("DecouplingSchedule: EMD/SEMD need inner set");
    inner->validate();
    if (inner->dim() != set.dim())
      throw std::invalid_argument("DecouplingSchedule: inner set dimension mismatch");
  }
}

int selection_index_deterministic(ScheduleKind kind, int step, int n_c) {
  if (step < 1) throw std::invalid_argument("selection_index: step must be >= 1");
  switch (kind) {
    case ScheduleKind::PDD:
    case ScheduleKind::EMD:
      return (step - 1) % n_c + 1;
    case ScheduleKind::SDD:
    case ScheduleKind::SEMD: {
      const int i = (step - 1) % (2 * n_c) + 1;  // 1..n_c then n_c..1
      return i <= n_c ? i : 2 * n_c + 1 - i;
    }
    default:
      throw std::invalid_argument("selection_index: rule is not deterministic");
  }
}

SelectionRule::SelectionRule(ScheduleKind kind, int n_c, RngStream& rng)
    : kind_(kind), n_c_(n_c), rng_(rng) {}

int SelectionRule::next() {
  ++step_;
  switch (kind_) {
    case ScheduleKind::NRD:
      return static_cast<int>(rng_.integer(static_cast<std::uint64_t>(n_c_))) + 1;
    case ScheduleKind::RandomPath: {
      const int pos = (step_ - 1) % n_c_;
      if (pos == 0) {  // fresh permutation each cycle
        cycle_perm_.resize(static_cast<std::size_t>(n_c_));
        std::iota(cycle_perm_.begin(), cycle_perm_.end(), 1);
        for (int i = n_c_ - 1; i > 0; --i) {
          const int j = static_cast<int>(rng_.integer(static_cast<std::uint64_t>(i + 1)));
          std::swap(cycle_perm_[static_cast<std::size_t>(i)],
                    cycle_perm_[static_cast<std::size_t>(j)]);
        }
      }
      return cycle_perm_[static_cast<std::size_t>(pos)];
    }
    default:
      return selection_index_deterministic(kind_, step_, n_c_);
  }
}

Matrix zeroth_order_average(const Matrix& h0, const DecouplingSet& set) {
  if (set.elements.empty()) throw std::invalid_argument("zeroth_order_average: empty set");
  if (set.dim() != h0.rows())
    throw std::invalid_argument("zeroth_order_average: dimension mismatch");
  Matrix avg = Matrix::Zero(h0.rows(), h0.cols());
  for (const auto& g : set.elements) avg += g.adjoint() * h0 * g;
  return avg / static_cast<double>(set.size());
}

bool verify_annihilator(const DecouplingSet& set, int trials, double tolerance,
                        RngStream& rng) {
  if (trials < 1) throw std::invalid_argument("verify_annihilator: trials must be >= 1");
  const Eigen::Index dim = set.dim();
  if (set.size() < static_cast<int>(dim) * static_cast<int>(dim)) return false;
  for (int t = 0; t < trials; ++t) {
    const Matrix h = perturb::sample_gue_raw(dim, rng);  // generic Hermitian
    const Matrix avg = zeroth_order_average(h, set);
    const Matrix expected =
        (h.trace() / static_cast<double>(dim)) * Matrix::Identity(dim, dim);
    if (qcore::max_abs(avg - expected) > tolerance) return false;
  }
  return true;
}

ScheduleRun run_schedule(const Matrix& h0, const DecouplingSchedule& schedule,
                         double total_time, RngStream& rng) {
  schedule.validate();
  if (h0.rows() != schedule.set.dim())
    throw std::invalid_argument("run_schedule: H0 dimension mismatch");
  const double steps_exact = total_time / schedule.dt;
  const int steps = static_cast<int>(std::llround(steps_exact));
  if (std::abs(steps_exact - steps) > 1e-9 || steps < 1)
    throw std::invalid_argument("run_schedule: T must be a positive multiple of dt");

  const Eigen::Index dim = h0.rows();
  const double n = static_cast<double>(dim);
  const Matrix step_u = qcore::unitary_exp(Matrix(h0 * schedule.dt));
  const bool embedded =
      schedule.kind == ScheduleKind::EMD || schedule.kind == ScheduleKind::SEMD;
  const int cycle = schedule.cycle_steps();

  SelectionRule rule(schedule.kind, schedule.set.size(), rng);

  ScheduleRun out;
  out.times.reserve(static_cast<std::size_t>(steps));
  out.fidelity.reserve(static_cast<std::size_t>(steps));
  out.selection.reserve(static_cast<std::size_t>(steps));

  Matrix u = Matrix::Identity(dim, dim);     // lab-frame propagator
  Matrix uc = Matrix::Identity(dim, dim);    // control-only propagator
  Matrix inner_r = Matrix::Identity(dim, dim);
  for (int i = 1; i <= steps; ++i) {
    if (embedded && (i - 1) % cycle == 0) {  // fresh G' element per cycle
      const auto idx = rng.integer(static_cast<std::uint64_t>(schedule.inner->size()));
      inner_r = schedule.inner->elements[static_cast<std::size_t>(idx)] * inner_r;
    }
    const int f = rule.next();
    out.selection.push_back(f);
    Matrix uc_new = schedule.set.elements[static_cast<std::size_t>(f - 1)];
    if (embedded) uc_new = uc_new * inner_r;
    // bang-bang pulse g_{f(i)} g_{f(i-1)}^dag, then free evolution over dt
    u = step_u * (uc_new * uc.adjoint()) * u;
    uc = std::move(uc_new);
    const Complex a = qcore::frobenius_inner(uc, u) / n;  // tr{U_c^dag U}/N
    out.times.push_back(i * schedule.dt);
    out.fidelity.push_back(std::norm(a));
  }
  out.toggled = uc.adjoint() * u;
  return out;
}

}  // namespace qstab::decouple
