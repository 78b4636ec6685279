#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qstab/algos.hpp"
#include "qstab/analytics.hpp"
#include "qstab/decouple.hpp"
#include "qstab/jumpcode.hpp"
#include "qstab/trajectory.hpp"

namespace qstab::experiments {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 20240817;
  int threads = 1;
  std::string output_dir = ".";
  json params;  // resolved (defaults filled)
};

// Names and one-line descriptions, in a stable order.
std::vector<std::pair<std::string, std::string>> list_experiments();

// Throws std::invalid_argument with a field-level message on schema
// violations; unknown fields are rejected.
ExperimentConfig parse_config_json(const json& j);
ExperimentConfig parse_config(const std::string& path);
json resolved_json(const ExperimentConfig& config);

// Runs the experiment and writes CSV artifacts plus a metadata sidecar into
// config.output_dir. Returns the list of files written.
std::vector<std::string> run(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Experiment entry points (used by the CLI and by the acceptance suite)

struct Figure5Params {
  int n_logical = 3;
  double kappa = 1e-3;
  double epsilon = 1e-4;
  double delta_t = 4.0;  // swap interval
  int m = 2;             // flips per swap interval
  double t_max = 2000.0;
  int grid = 101;
  int trajectories = 100;
  std::uint64_t seed = 20240817;
  int threads = 1;
};

struct Figure5Result {
  trajectory::EnsembleCurve unprotected;
  trajectory::EnsembleCurve decoupled;  // flips + swaps, no code
  trajectory::EnsembleCurve jumpcode;   // code + recovery, no decoupling
  trajectory::EnsembleCurve combined;
  std::vector<double> analytic_time;
  std::vector<double> f_combined_c1sq;    // F_ID with c3 = c1^2
  std::vector<double> f_combined_c3upper; // F_ID with c3 at its upper bound
  std::vector<double> f_jumpcode_only;
  std::vector<double> p_unprotected;
  double mean_c2 = 0, mean_c1_sq = 0, mean_c3_upper = 0;
  double t_rec = 0;
  double n1_unencoded = 0;
  int n_physical = 0;
};

Figure5Result run_figure5(const Figure5Params& params);

// Two-word superposition (|0 1..1> + |1 0 1..1>)/sqrt(2): any single decay
// maps it onto an orthogonal state and permutations see distinct couplings.
qcore::StateVector coherent_pair_state(int n_qubits);
// Uniform logical superposition |+>^{n_L}, encoded.
qcore::StateVector encoded_plus_state(const jumpcode::JumpCode& code);

struct ParecScan {
  std::vector<int> iterations;        // 1..t_max
  std::vector<double> parec_mean;     // ensemble mean fidelity
  std::vector<double> parec_stderr;
  std::vector<double> bare;           // PAREC off (deterministic)
  std::vector<double> bound;          // 1 - 4 t n_g tr{dH^2}/N
  double tr_dh2_over_n = 0;
  int n_gates = 0;
};

// Iterated QFT with one fixed GUE perturbation exp(-i delta V) between
// consecutive gates; the PAREC curve averages over fresh Pauli draws.
ParecScan parec_fidelity_scan(int n_qubits, double delta, int t_max, int realizations,
                              std::uint64_t seed);

struct MemoryScan {
  std::vector<int> steps;
  std::vector<double> times;
  std::vector<double> mean;      // over pulse realizations
  std::vector<double> std_error;
};

// NRD quantum-memory run: Pauli-annihilator pulses against a fixed
// Hamiltonian (GUE or chain), mean toggled-frame fidelity per step.
MemoryScan nrd_memory_scan(const Matrix& h0, double delta_t, int steps,
                           int realizations, std::uint64_t seed);

}  // namespace qstab::experiments
