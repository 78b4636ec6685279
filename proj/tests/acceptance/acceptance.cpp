// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Run with no arguments for the full suite or with an index (1-12) for a
// single criterion. Exit status is the number of failed criteria.

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "qstab/algos.hpp"
#include "qstab/analytics.hpp"
#include "qstab/decouple.hpp"
#include "qstab/experiments.hpp"
#include "qstab/jumpcode.hpp"
#include "qstab/perturb.hpp"
#include "qstab/trajectory.hpp"

using namespace qstab;
using qcore::PauliString;
using qcore::StateVector;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

std::string fmtd(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. PAREC exactness

bool c01_parec_exactness(std::string& detail) {
  double worst = 0;
  for (int n : {2, 3, 4}) {
    const algos::GateSequence seq = algos::build_qft(n);
    for (int t : {1, 2, 3}) {
      const Matrix want = qcore::unitary_power(seq.product(), t);
      for (int s = 0; s < 100; ++s) {
        RngStream rng = RngStream::child(1001, static_cast<std::uint64_t>(s),
                                         static_cast<std::uint64_t>(10 * n + t));
        const algos::GateSequence parec = algos::parec_transform(seq, t, rng);
        worst = std::max(worst, qcore::max_abs(Matrix(parec.product() - want)));
      }
    }
  }
  detail = "max |product(PAREC) - U^t| = " + fmtd(worst) + " over 900 runs";
  return worst < 1e-10;
}

// ---------------------------------------------------------------------------
// 2. Correlation-matrix closed form vs GUE Monte Carlo

bool c02_correlation_closed_form(std::string& detail) {
  const int n_q = 4;
  const double delta = 1e-3;
  const algos::GateSequence seq = algos::build_qft(n_q);
  const auto cm = algos::correlation_matrix_gue_average(seq, delta);
  for (int j = 0; j < seq.size(); ++j) {
    if (cm.normalized(j, j) != 1.0) {
      detail = "normalized diagonal not exactly 1";
      return false;
    }
  }

  const auto raw = cm.raw();
  const int n_g = seq.size();
  const Eigen::Index dim = seq.dim();
  const double n = static_cast<double>(dim);
  const auto prefixes = seq.prefix_products();
  const int samples = 1000;
  RngStream rng(1002);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n_g, n_g);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(n_g, n_g);
  std::vector<Matrix> tilde(static_cast<std::size_t>(n_g));
  for (int s = 0; s < samples; ++s) {
    const Matrix dh = delta * perturb::sample_gue(dim, rng).matrix;
    for (int j = 0; j < n_g; ++j)
      tilde[static_cast<std::size_t>(j)] =
          prefixes[static_cast<std::size_t>(j) + 1].adjoint() * dh *
          prefixes[static_cast<std::size_t>(j) + 1];
    for (int j = 0; j < n_g; ++j)
      for (int k = 0; k <= j; ++k) {
        const double c = (tilde[static_cast<std::size_t>(j)] *
                          tilde[static_cast<std::size_t>(k)])
                             .trace()
                             .real() /
                         n;
        mean(j, k) += c;
        m2(j, k) += c * c;
      }
  }
  double worst_z = 0;
  for (int j = 0; j < n_g; ++j)
    for (int k = 0; k <= j; ++k) {
      const double m = mean(j, k) / samples;
      const double var = std::max(0.0, m2(j, k) / samples - m * m);
      const double se = std::sqrt(var / samples);
      const double z = std::abs(m - raw(j, k)) / (se > 0 ? se : 1e-30);
      worst_z = std::max(worst_z, z);
      if (std::abs(m - raw(j, k)) > 3.0 * se + 1e-15) {
        detail = "entry (" + std::to_string(j + 1) + "," + std::to_string(k + 1) +
                 ") off by " + fmtd(z) + " sigma";
        return false;
      }
    }
  detail = "all 144 entries within 3 sigma of Monte Carlo (worst " + fmtd(worst_z) +
           " sigma, 1000 GUE samples)";
  return true;
}

// ---------------------------------------------------------------------------
// 3. PAREC averaging pattern

bool c03_parec_pattern(std::string& detail) {
  const int n_q = 6;
  const double delta = 1e-3;
  const algos::GateSequence seq = algos::build_qft(n_q);
  RngStream rng_t(1003);
  const algos::GateSequence parec = algos::parec_transform(seq, 1, rng_t);
  RngStream rng(1004);
  const auto pc = algos::parec_correlation_average(parec, delta, 10000, rng);

  const int total = 2 * seq.size();
  double worst_else = 0, worst_struct = 0;
  for (int j = 0; j < total; ++j) {
    for (int k = 0; k < total; ++k) {
      const double mc = pc.monte_carlo.normalized(j, k);
      const double expect = pc.expected.normalized(j, k);
      const bool structured =
          j == k || (j > k && j % 2 == 1 && j == k + 1) || (k > j && k % 2 == 1 && k == j + 1);
      if (structured) {
        worst_struct = std::max(worst_struct, std::abs(mc - expect));
      } else {
        worst_else = std::max(worst_else, mc);
      }
    }
  }
  detail = "max 'else' entry " + fmtd(worst_else) + " (limit 0.02), structured max |err| " +
           fmtd(worst_struct);
  return worst_else < 0.02 && worst_struct < 0.02;
}

// ---------------------------------------------------------------------------
// 4. Second-order amplitude order check

bool c04_second_order(std::string& detail) {
  const int n_q = 4, t = 2;
  const algos::GateSequence seq = algos::build_qft(n_q);
  RngStream rng(1005);
  const Matrix v = perturb::sample_gue(seq.dim(), rng).matrix;
  const Matrix u_t = qcore::unitary_power(seq.product(), t);

  const std::vector<double> deltas{1e-3, 5e-4, 2.5e-4};
  std::vector<double> errs;
  for (double delta : deltas) {
    const Matrix dh = delta * v;
    algos::SidePerturbations pert;
    pert.left.assign(static_cast<std::size_t>(seq.size()), dh);
    pert.right.resize(static_cast<std::size_t>(seq.size()));
    const Complex a2 = algos::fidelity_amplitude_second_order(seq, pert, t);

    std::vector<Matrix> left(static_cast<std::size_t>(seq.size()), dh);
    const std::vector<Matrix> right(static_cast<std::size_t>(seq.size()));
    const Matrix w = qcore::unitary_power(algos::perturbed_product(seq, left, right), t);
    const Complex exact = qcore::frobenius_inner(u_t, w) / static_cast<double>(seq.dim());
    errs.push_back(std::abs(a2 - exact));
  }
  // least-squares slope of log(err) vs log(delta)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double x = std::log(deltas[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(deltas.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  detail = "log-log slope " + fmtd(slope) + " (want 3.0 +- 0.2)";
  return std::abs(slope - 3.0) <= 0.2;
}

// ---------------------------------------------------------------------------
// 5. PAREC linear vs quadratic decay, plus the bound

bool c05_linear_vs_quadratic(std::string& detail) {
  const auto scan = experiments::parec_fidelity_scan(4, 1e-3, 50, 300, 1006);

  // fit 1 - F = a t + b t^2
  auto quad_fit = [](const std::vector<double>& f) {
    double s_tt = 0, s_tq = 0, s_qq = 0, b_t = 0, b_q = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double t = static_cast<double>(i + 1);
      const double y = 1.0 - f[i];
      const double q = t * t;
      s_tt += t * t;
      s_tq += t * q;
      s_qq += q * q;
      b_t += t * y;
      b_q += q * y;
    }
    const double det = s_tt * s_qq - s_tq * s_tq;
    return std::pair<double, double>{(b_t * s_qq - b_q * s_tq) / det,
                                     (s_tt * b_q - s_tq * b_t) / det};
  };
  const auto [a_on, b_on] = quad_fit(scan.parec_mean);
  const auto [a_off, b_off] = quad_fit(scan.bare);
  (void)a_on;
  (void)a_off;

  bool bound_ok = true;
  double worst_gap = 1.0;
  for (std::size_t i = 0; i < scan.parec_mean.size(); ++i) {
    const double gap = scan.parec_mean[i] - scan.bound[i];
    worst_gap = std::min(worst_gap, gap);
    if (scan.parec_mean[i] < scan.bound[i] - 1e-9) bound_ok = false;
  }
  const double ratio = std::abs(b_off) / std::max(std::abs(b_on), 1e-300);
  detail = "quadratic coefficients: off " + fmtd(b_off) + ", on " + fmtd(b_on) +
           " (ratio " + fmtd(ratio) + "), min fidelity-bound gap " + fmtd(worst_gap);
  return ratio >= 10.0 && bound_ok;
}

// ---------------------------------------------------------------------------
// 6. Jump-code recovery

bool c06_recovery(std::string& detail) {
  double worst = 1.0;
  for (int n_l : {1, 2, 3}) {
    const auto code = jumpcode::build_code(n_l);
    RngStream rng = RngStream::child(1007, static_cast<std::uint64_t>(n_l), 0);
    const StateVector psi = jumpcode::encode(qcore::random_state(n_l, rng), code);
    for (int q = 0; q < code.n_physical; ++q) {
      CVector post = CVector::Zero(psi.dim());
      const std::uint64_t bit = 1ULL << qcore::bit_position(code.n_physical, q);
      for (Eigen::Index i = 0; i < psi.dim(); ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        if (idx & bit) post[static_cast<Eigen::Index>(idx & ~bit)] = psi.amps()[i];
      }
      post /= post.norm();
      const StateVector rec =
          jumpcode::recovery(StateVector(code.n_physical, post), q, code);
      worst = std::min(worst, std::norm(psi.overlap(rec)));
    }
  }
  detail = "min post-recovery fidelity " + fmtd(worst) + " over n_P in {4,6,8}";
  return worst > 1.0 - 1e-10;
}

// ---------------------------------------------------------------------------
// 7. Constants brute force

bool c07_constants(std::string& detail) {
  const double wanted_pdiff[3] = {1.0, 3.0 / 15.0, 3.0 / 35.0};
  double worst = 0;
  int idx = 0;
  for (int n_p : {4, 6, 8}) {
    const auto code = jumpcode::build_code(n_p / 2 - 1);
    const double p_count = jumpcode::p_diff_counting(n_p);
    if (std::abs(p_count - wanted_pdiff[idx]) > 1e-12) {
      detail = "p'_+ - p'_- counting mismatch at n_P = " + std::to_string(n_p);
      return false;
    }
    const auto dfs = jumpcode::CodespaceProjector::dfs(n_p);
    for (int d = 0; d < 20; ++d) {
      RngStream rng = RngStream::child(1008, static_cast<std::uint64_t>(d),
                                       static_cast<std::uint64_t>(n_p));
      const auto chain = perturb::sample_uniform_chain(n_p, 1e-4, rng);
      const auto cc = jumpcode::code_constants(chain, code);
      if (std::abs(cc.p_diff - p_count) > 1e-12) {
        detail = "closed-form p-difference mismatch";
        return false;
      }

      perturb::ChainModel zz = chain;
      zz.detunings.setZero();
      const Matrix avg_h = jumpcode::permutation_average(
          Matrix(perturb::chain_diagonal(zz).cast<Complex>().asDiagonal()), n_p);
      const Matrix h =
          Matrix(perturb::chain_diagonal(chain).cast<Complex>().asDiagonal());
      const Matrix avg_h2 = jumpcode::permutation_average(Matrix(h * h), n_p);
      for (Eigen::Index i = 0; i < dfs.dim; ++i) {
        if (dfs.diag[i] == 0) continue;
        worst = std::max(worst, std::abs(avg_h(i, i).real() - cc.c1));
        worst = std::max(worst, std::abs(avg_h2(i, i).real() - cc.c2));
      }
    }
    ++idx;
  }
  detail = "max |closed form - brute force| = " + fmtd(worst) +
           " over n_P in {4,6,8} x 20 draws";
  return worst < 1e-12;
}

// ---------------------------------------------------------------------------
// 8. Flip cancellation

bool c08_flip_cancellation(std::string& detail) {
  double worst_transverse = 0, worst_z = 0;
  for (int n : {4, 6, 8}) {
    for (int d = 0; d < 3; ++d) {
      RngStream rng = RngStream::child(1009, static_cast<std::uint64_t>(d),
                                       static_cast<std::uint64_t>(n));
      const auto chain = perturb::sample_uniform_chain(n, 0.3, rng, true);
      const Matrix h0 = perturb::build_chain_hamiltonian(chain);
      const Matrix uf = jumpcode::flip_operator(n).to_matrix();
      const Matrix avg = 0.5 * (h0 + uf.adjoint() * h0 * uf);
      const double dim = static_cast<double>(h0.rows());
      for (const auto& p : qcore::pauli_basis(n)) {
        int transverse = 0, zs = 0;
        for (int q = 0; q < n; ++q) {
          const auto letter = p.op(q);
          if (letter == qcore::Pauli::X || letter == qcore::Pauli::Y) ++transverse;
          if (letter == qcore::Pauli::Z) ++zs;
        }
        const Complex before = qcore::pauli_matrix_trace(p, h0) / dim;
        const Complex after = qcore::pauli_matrix_trace(p, avg) / dim;
        if (transverse > 0) worst_transverse = std::max(worst_transverse, std::abs(after));
        else worst_z = std::max(worst_z, std::abs(after - before));
        (void)zs;
      }
    }
  }
  detail = "max surviving X/Y component " + fmtd(worst_transverse) +
           ", max Z/ZZ change " + fmtd(worst_z);
  return worst_transverse < 1e-12 && worst_z < 1e-12;
}

// ---------------------------------------------------------------------------
// 9. Decay baseline

bool c09_decay_baseline(std::string& detail) {
  const int n = 4, n1 = 2;
  const double kappa = 1e-2, total = 100.0;
  const int m = 10000, grid = 11;
  const StateVector psi0 = StateVector::basis(n, 0b1100);
  std::vector<int> survived(grid, 0);
  for (int i = 0; i < m; ++i) {
    RngStream rj = RngStream::child(1010, static_cast<std::uint64_t>(i), 0);
    RngStream rp = RngStream::child(1010, static_cast<std::uint64_t>(i), 1);
    const auto rec = trajectory::evolve_trajectory(
        trajectory::LindbladModel::zero(n, kappa), trajectory::Protocol{}, psi0, total,
        grid, rj, rp);
    for (int g = 0; g < grid; ++g)
      if (rec.jump_counts[static_cast<std::size_t>(g)] == 0)
        ++survived[static_cast<std::size_t>(g)];
  }
  double worst_z = 0;
  for (int g = 1; g < grid; ++g) {
    const double t = total * g / (grid - 1);
    const double p = std::exp(-n1 * kappa * t);
    const double se = std::sqrt(p * (1 - p) / m);
    const double z = std::abs(survived[static_cast<std::size_t>(g)] / static_cast<double>(m) - p) / se;
    worst_z = std::max(worst_z, z);
    if (z > 3.0) {
      detail = "survival off by " + fmtd(z) + " sigma at t = " + fmtd(t);
      return false;
    }
  }
  detail = "survival within 3 sigma of exp(-n1 kappa t) at 10 grid times (worst " +
           fmtd(worst_z) + " sigma, 10^4 trajectories)";
  return true;
}

// ---------------------------------------------------------------------------
// 10. Figure 5 reproduction

bool c10_figure5(std::string& detail) {
  experiments::Figure5Params p;
  p.seed = 1011;
  const auto res = experiments::run_figure5(p);

  const std::size_t last = res.combined.times.size() - 1;
  const double u = res.unprotected.mean[last];
  const double d = res.decoupled.mean[last];
  const double j = res.jumpcode.mean[last];
  const double c = res.combined.mean[last];
  const bool ordering = u < d && u < j && d < c && j < c;

  bool within = true;
  double worst_z = 0;
  for (std::size_t g = 0; g < res.combined.times.size(); ++g) {
    const double diff = std::abs(res.combined.mean[g] - res.f_combined_c1sq[g]);
    const double band = 3.0 * res.combined.std_error[g] + 1e-9;
    if (res.combined.std_error[g] > 0)
      worst_z = std::max(worst_z, diff / res.combined.std_error[g]);
    if (diff > band) within = false;
  }
  detail = "t=2000: unprotected " + fmtd(u) + " < decoupled " + fmtd(d) +
           ", jumpcode " + fmtd(j) + " < combined " + fmtd(c) + "; F_ID(c1^2) worst " +
           fmtd(worst_z) + " sigma [c2 " + fmtd(res.mean_c2) + ", c1^2 " +
           fmtd(res.mean_c1_sq) + ", c3_up " + fmtd(res.mean_c3_upper) + "]";
  return ordering && within;
}

// ---------------------------------------------------------------------------
// 11. Trajectory ensemble vs dense master equation

bool c11_trajectory_oracle(std::string& detail) {
  const int n = 2;
  const double kappa = 1e-2, total = 20.0;
  RngStream rng_h(1012);
  const Matrix h = 0.5 * perturb::sample_gue(4, rng_h).matrix;
  const auto model = trajectory::LindbladModel::dense(n, kappa, h);
  CVector a0 = CVector::Zero(4);
  a0[1] = a0[2] = a0[3] = 1.0 / std::sqrt(3.0);
  const StateVector psi0(n, a0);
  const Matrix rho0 = psi0.amps() * psi0.amps().adjoint();

  const int m = 10000, grid = 5;
  double worst = 0;
  for (int g = 1; g <= grid; ++g) {
    const double t = total * g / grid;
    Matrix rho = Matrix::Zero(4, 4);
    for (int i = 0; i < m; ++i) {
      RngStream rj = RngStream::child(1013, static_cast<std::uint64_t>(i), 0);
      RngStream rp = RngStream::child(1013, static_cast<std::uint64_t>(i), 1);
      const auto rec = trajectory::evolve_trajectory(model, trajectory::Protocol{}, psi0,
                                                     t, 2, rj, rp);
      rho += rec.final_state.amps() * rec.final_state.amps().adjoint();
    }
    rho /= m;
    const Matrix want = trajectory::integrate_lindblad_rk4(model, rho0, t, 2000);
    worst = std::max(worst, qcore::trace_distance(rho, want));
  }
  detail = "max trace distance " + fmtd(worst) + " over 5 grid times (10^4 trajectories)";
  return worst < 1e-2;
}

// ---------------------------------------------------------------------------
// 12. Annihilator verification

bool c12_annihilator(std::string& detail) {
  RngStream rng(1014);
  for (int n = 1; n <= 3; ++n) {
    if (!decouple::verify_annihilator(decouple::DecouplingSet::pauli_annihilator(n), 5,
                                      1e-10, rng)) {
      detail = "full Pauli basis rejected at n = " + std::to_string(n);
      return false;
    }
  }
  // deliberately broken sets
  const auto too_small = decouple::DecouplingSet::from_paulis(
      {PauliString::identity(1), PauliString::parse("X")});
  auto degenerate_paulis = qcore::pauli_basis(1);
  degenerate_paulis[3] = degenerate_paulis[0];  // right size, wrong content
  const auto degenerate = decouple::DecouplingSet::from_paulis(degenerate_paulis);
  if (decouple::verify_annihilator(too_small, 5, 1e-10, rng) ||
      decouple::verify_annihilator(degenerate, 5, 1e-10, rng)) {
    detail = "a broken set passed";
    return false;
  }
  detail = "Pauli basis passes for n <= 3; undersized and degenerate sets fail";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"parec-exactness", c01_parec_exactness},
      {"correlation-closed-form", c02_correlation_closed_form},
      {"parec-averaging-pattern", c03_parec_pattern},
      {"second-order-amplitude", c04_second_order},
      {"linear-vs-quadratic", c05_linear_vs_quadratic},
      {"jumpcode-recovery", c06_recovery},
      {"constants-brute-force", c07_constants},
      {"flip-cancellation", c08_flip_cancellation},
      {"decay-baseline", c09_decay_baseline},
      {"figure5-reproduction", c10_figure5},
      {"trajectory-vs-master-equation", c11_trajectory_oracle},
      {"annihilator-verification", c12_annihilator},
  };

  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
      return 64;
    }
  }

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i + 1) != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  C%02zu %-32s %s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
