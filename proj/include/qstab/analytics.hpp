#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace qstab::analytics {

// Sampled closed-form prediction, plot-ready.
struct PredictionCurve {
  std::string model;
  std::map<std::string, double> params;
  std::vector<double> times;
  std::vector<double> fidelity;
};

// exp(-n1 kappa t): probability that no decay has occurred among n1 initially
// excited qubits.
double p_no_decay(double n1, double kappa, double t);

// Jump-code memory: exp(-(n_q kappa / 2)^2 t_rec t).
double f_jumpcode(int n_q, double kappa, double t_rec, double t);
// Expected number of decay events up to t: (n_q/2) kappa t.
double expected_jumps(int n_q, double kappa, double t);

// Flip/swap-decoupled coherent decay: exp(-t dt (c2 - c3)); callers choose
// c3 = c1^2 (uniform superposition) or the state-dependent upper bound.
double f_coherent(double t, double delta_t, double c2, double c3);

// Combined memory, product form:
// exp(-(c2-c3) t dt (1 + kappa t_rec n_q/2)) * exp(-(n_q kappa/2)^2 t_rec t).
double f_combined(int n_q, double kappa, double t_rec, double delta_t, double c2,
                  double c3, double t);

// Random-matrix fidelity decay exp(-t/t_c - 2 t^2/(sigma t_c N)).
double frahm_decay(double t, double t_c, double sigma, double dim);

// PAREC lower bound 1 - 4 t n_g tr{dH^2}/N and its variants.
double parec_bound(double t, int n_g, double tr_dh2_over_n);
double parec_bound_unequal_intervals(double t, double tr_h2_over_n,
                                     const std::vector<double>& dt_j, double dt_bb);
double parec_bound_once_per_iteration(double t, int n_g, double tr_dh2_over_n);
// Quantum-memory specialization 1 - T dt tr{H0^2}/N.
double nrd_memory_bound(double total_time, double delta_t, double tr_h2_over_n);

// Worst-case bound scaling monomials (reference exponents only, no claimed
// prefactor): PDD T^2 Tc^2 k^4, SDD T^2 Tc^4 k^6, NRD T dt k^2,
// EMD T Tc^3 k^4, SEMD T Tc^5 k^6.
double bound_scaling(const std::string& kind, double total_time, double interval,
                     double kappa);

PredictionCurve sample_curve(const std::string& model,
                             const std::map<std::string, double>& params,
                             const std::vector<double>& times,
                             const std::function<double(double)>& f);

}  // namespace qstab::analytics
