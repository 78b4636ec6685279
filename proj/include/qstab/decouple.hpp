#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qstab/qcore.hpp"
#include "qstab/rng.hpp"

namespace qstab::decouple {

// Set of unitary decoupling operations G. Elements are stored dense; the
// Pauli factories keep the string labels for logging.
struct DecouplingSet {
  std::vector<Matrix> elements;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(elements.size()); }
  Eigen::Index dim() const { return elements.empty() ? 0 : elements.front().rows(); }

  static DecouplingSet from_paulis(const std::vector<qcore::PauliString>& paulis);
  // The full nice error basis {I,X,Y,Z}^{(x) n} (4^n elements).
  static DecouplingSet pauli_annihilator(int n_qubits);
  void validate() const;  // every element unitary, equal dims
};

enum class ScheduleKind { PDD, SDD, NRD, EMD, SEMD, RandomPath };

std::string kind_name(ScheduleKind k);
ScheduleKind kind_from_name(const std::string& name);

// Bang-bang schedule: pulses at multiples of dt, selection rule per kind.
// EMD/SEMD additionally draw one element of `inner` per completed cycle.
struct DecouplingSchedule {
  ScheduleKind kind = ScheduleKind::PDD;
  double dt = 1.0;  // pulse interval, units of t0
  DecouplingSet set;
  std::optional<DecouplingSet> inner;  // annihilator G' for EMD/SEMD
  std::uint64_t seed = 0;

  int cycle_steps() const;  // n_c, doubled for SDD/SEMD
  double cycle_time() const { return cycle_steps() * dt; }
  void validate() const;
};

// Deterministic part of the selection rules (PDD periodic, SDD palindrome
// over the doubled cycle). Steps are 1-based; returns a 1-based index.
int selection_index_deterministic(ScheduleKind kind, int step, int n_c);

// Streaming selector covering the random rules as well (NRD uniform draws,
// RandomPath with a fresh cycle permutation).
class SelectionRule {
 public:
  SelectionRule(ScheduleKind kind, int n_c, RngStream& rng);
  int next();  // index for steps 1, 2, 3, ... in order

 private:
  ScheduleKind kind_;
  int n_c_;
  int step_ = 0;
  RngStream& rng_;
  std::vector<int> cycle_perm_;
};

// (1/|G|) sum_g g^dag H0 g
Matrix zeroth_order_average(const Matrix& h0, const DecouplingSet& set);

// Pass iff |G| >= N^2 and (1/|G|) sum g^dag H g == (tr H / N) I within tol
// for `trials` random Hermitian matrices.
bool verify_annihilator(const DecouplingSet& set, int trials, double tolerance,
                        RngStream& rng);

struct ScheduleRun {
  Matrix toggled;                 // U_c^dag(T) U(T)
  std::vector<double> times;      // end of step i
  std::vector<double> fidelity;   // entanglement fidelity of toggled frame vs I
  std::vector<int> selection;     // f(i) per step (1-based indices)
};

// Alternates exact free evolution exp(-i H0 dt) with instantaneous pulses
// g_{f(i)} g_{f(i-1)}^dag; T must be an integer multiple of dt.
ScheduleRun run_schedule(const Matrix& h0, const DecouplingSchedule& schedule,
                         double total_time, RngStream& rng);

}  // namespace qstab::decouple
