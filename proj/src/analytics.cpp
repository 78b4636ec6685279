#include "qstab/analytics.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace qstab::analytics {

double p_no_decay(double n1, double kappa, double t) {
  return std::exp(-n1 * kappa * t);
}

double f_jumpcode(int n_q, double kappa, double t_rec, double t) {
  const double r = 0.5 * n_q * kappa;
  return std::exp(-r * r * t_rec * t);
}

double expected_jumps(int n_q, double kappa, double t) {
  return 0.5 * n_q * kappa * t;
}

double f_coherent(double t, double delta_t, double c2, double c3) {
  return std::exp(-t * delta_t * (c2 - c3));
}

double f_combined(int n_q, double kappa, double t_rec, double delta_t, double c2,
                  double c3, double t) {
  const double coherent = (c2 - c3) * t * delta_t * (1.0 + 0.5 * kappa * t_rec * n_q);
  const double r = 0.5 * n_q * kappa;
  return std::exp(-coherent) * std::exp(-r * r * t_rec * t);
}

double frahm_decay(double t, double t_c, double sigma, double dim) {
  return std::exp(-t / t_c - 2.0 * t * t / (sigma * t_c * dim));
}

double parec_bound(double t, int n_g, double tr_dh2_over_n) {
  return 1.0 - 4.0 * t * n_g * tr_dh2_over_n;
}

double parec_bound_unequal_intervals(double t, double tr_h2_over_n,
                                     const std::vector<double>& dt_j, double dt_bb) {
  double s = 0;
  for (double dt : dt_j) s += (dt + dt_bb) * (dt + dt_bb);
  return 1.0 - t * tr_h2_over_n * s;
}

double parec_bound_once_per_iteration(double t, int n_g, double tr_dh2_over_n) {
  const double m = static_cast<double>(n_g + 1);
  return 1.0 - t * m * m * tr_dh2_over_n;
}

double nrd_memory_bound(double total_time, double delta_t, double tr_h2_over_n) {
  return 1.0 - total_time * delta_t * tr_h2_over_n;
}

double bound_scaling(const std::string& kind, double total_time, double interval,
                     double kappa) {
  const double t = total_time, x = interval, k = kappa;
  if (kind == "PDD") return t * t * x * x * std::pow(k, 4);
  if (kind == "SDD") return t * t * std::pow(x, 4) * std::pow(k, 6);
  if (kind == "NRD") return t * x * k * k;
  if (kind == "EMD") return t * std::pow(x, 3) * std::pow(k, 4);
  if (kind == "SEMD") return t * std::pow(x, 5) * std::pow(k, 6);
  throw std::invalid_argument("bound_scaling: unknown kind " + kind);
}

PredictionCurve sample_curve(const std::string& model,
                             const std::map<std::string, double>& params,
                             const std::vector<double>& times,
                             const std::function<double(double)>& f) {
  PredictionCurve c;
  c.model = model;
  c.params = params;
  c.times = times;
  c.fidelity.reserve(times.size());
  for (double t : times) c.fidelity.push_back(f(t));
  return c;
}

}  // namespace qstab::analytics
