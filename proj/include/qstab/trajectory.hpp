#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qstab/jumpcode.hpp"
#include "qstab/perturb.hpp"
#include "qstab/qcore.hpp"
#include "qstab/rng.hpp"

namespace qstab::trajectory {

// Register with uniform spontaneous-decay rate kappa on every qubit
// (L_k = sqrt(kappa) |0><1|_k) and a static Hamiltonian that is either zero,
// diagonal in the computational basis, or dense.
struct LindbladModel {
  int n_qubits = 0;
  double kappa = 0;
  Eigen::VectorXd h_diag;  // diagonal Hamiltonian (empty if unused)
  Matrix h_dense;          // dense Hamiltonian (empty if unused)

  static LindbladModel zero(int n_qubits, double kappa);
  static LindbladModel diagonal(int n_qubits, double kappa, Eigen::VectorXd diag);
  static LindbladModel dense(int n_qubits, double kappa, Matrix h);
  static LindbladModel from_chain(const perturb::ChainModel& chain, double kappa);

  bool has_hamiltonian() const { return h_diag.size() != 0 || h_dense.size() != 0; }
  Matrix hamiltonian_matrix() const;
  void validate() const;
};

// Flip pulses every tau, swap layers every m*tau (m even), unitary recovery
// of duration t_rec after each detected jump. Decoupling pulses that fall
// strictly inside a recovery window are dropped and the grids resume
// afterwards; a second jump inside a window is uncorrectable.
struct Protocol {
  double flip_interval = 0;  // tau; 0 disables flips (and swaps)
  int swap_every = 0;        // m; 0 disables swaps
  bool recovery = false;
  double recovery_time = 0;

  double swap_interval() const { return flip_interval * swap_every; }
  void validate() const;
};

// t_rec = (3/2 (n_P - 1) + 2) t0: one Hadamard, n_P - 1 CNOTs at 3/2 t0 each,
// one X.
double recovery_duration(int n_physical);

struct JumpEvent {
  double time = 0;
  int qubit = -1;
};

enum class EventKind { Flip, Swap, Jump, RecoveryEnd, Uncorrectable };

struct Event {
  double time = 0;
  EventKind kind = EventKind::Flip;
  int qubit = -1;  // jumps only
};

// Reconstructs the merged event sequence for known jump times: flips on the
// tau grid, swaps on the m*tau grid, pulses inside recovery windows dropped.
std::vector<Event> schedule_events(const Protocol& protocol, double total_time,
                                   const std::vector<JumpEvent>& jumps);

struct TrajectoryRecord {
  std::vector<double> times;      // uniform grid including t = 0
  std::vector<double> fidelity;   // |<psi_ref | psi>|^2 at grid times
  std::vector<int> jump_counts;   // cumulative jumps at grid times
  std::vector<JumpEvent> jumps;
  std::vector<Event> applied;     // pulses/recoveries actually applied
  bool failed = false;            // second jump during a recovery window
  double failed_time = 0;
  std::uint64_t seed = 0;
  qcore::StateVector final_state{1};
};

// Jump unraveling with exact waiting-time inversion: the un-normalized state
// evolves under H_eff = H - (i/2) kappa N_ex until its norm^2 crosses a
// uniform threshold, the decayed qubit is sampled from ||L_k psi||^2, and the
// protocol's pulses/recoveries are interleaved. The fidelity reference is
// psi0 transported through the applied pulses (pulses are not errors).
TrajectoryRecord evolve_trajectory(const LindbladModel& model, const Protocol& protocol,
                                   const qcore::StateVector& psi0, double total_time,
                                   int grid_points, RngStream& rng_jump,
                                   RngStream& rng_pulse);

struct EnsembleSpec {
  int trajectories = 1;
  std::uint64_t master_seed = 0;
  int threads = 1;
  double total_time = 1;
  int grid_points = 11;
  Protocol protocol;
  qcore::StateVector psi0{1};
  // Called once per trajectory with a dedicated stream; enables disorder
  // resampling. Must be thread-safe (pure).
  std::function<LindbladModel(RngStream&)> model;
};

struct EnsembleCurve {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> jumps_mean;
  int trajectories = 0;
};

// Deterministic given the master seed: trajectory index i uses streams
// child(seed, i, 0) for jumps, child(seed, i, 1) for pulses and
// child(seed, i, 2) for the model draw; the reduction is by index order
// regardless of thread count.
EnsembleCurve run_ensemble(const EnsembleSpec& spec);

// Dense master-equation integration (RK4), used as the oracle in tests and
// available to experiments: rho' = -i[H, rho] + sum_k L rho L^dag - {L^dag L, rho}/2.
Matrix integrate_lindblad_rk4(const LindbladModel& model, const Matrix& rho0,
                              double total_time, int steps);

}  // namespace qstab::trajectory
