#include "qstab/trajectory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

namespace qstab::trajectory {

using qcore::StateVector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// exp(G s) for G = -i H - (kappa/2) N_ex. Diagonal models evolve entrywise;
// dense models go through one eigendecomposition of the non-Hermitian
// generator.
class Drift {
 public:
  Drift(const LindbladModel& model) : n_(model.n_qubits), dim_(1LL << model.n_qubits) {
    gamma_half_.resize(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i)
      gamma_half_[i] = 0.5 * model.kappa *
                       static_cast<double>(std::popcount(static_cast<std::uint64_t>(i)));
    if (model.h_dense.size() != 0) {
      dense_ = true;
      Matrix g = Complex(0, -1) * model.h_dense;
      for (Eigen::Index i = 0; i < dim_; ++i) g(i, i) -= gamma_half_[i];
      Eigen::ComplexEigenSolver<Matrix> es(g);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("trajectory: generator eigendecomposition failed");
      v_ = es.eigenvectors();
      lambda_ = es.eigenvalues();
      v_inv_ = v_.inverse();
      const double residual =
          (v_ * lambda_.asDiagonal() * v_inv_ - g).cwiseAbs().maxCoeff();
      if (residual > 1e-9 * std::max(1.0, g.cwiseAbs().maxCoeff()))
        throw std::runtime_error("trajectory: generator is too ill-conditioned");
    } else {
      omega_ = model.h_diag.size() != 0 ? model.h_diag
                                        : Eigen::VectorXd::Zero(dim_);
    }
  }

  void advance(const CVector& in, double s, CVector& out) const {
    if (!dense_) {
      out.resize(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i)
        out[i] = in[i] * std::exp(Complex(-gamma_half_[i] * s, -omega_[i] * s));
      return;
    }
    CVector w = v_inv_ * in;
    for (Eigen::Index i = 0; i < dim_; ++i) w[i] *= std::exp(lambda_[i] * s);
    out = v_ * w;
  }

  double norm2_after(const CVector& in, double s) const {
    CVector tmp;
    advance(in, s, tmp);
    return tmp.squaredNorm();
  }

 private:
  int n_;
  Eigen::Index dim_;
  bool dense_ = false;
  Eigen::VectorXd gamma_half_;
  Eigen::VectorXd omega_;
  Matrix v_, v_inv_;
  CVector lambda_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Model / protocol

LindbladModel LindbladModel::zero(int n_qubits, double kappa) {
  LindbladModel m;
  m.n_qubits = n_qubits;
  m.kappa = kappa;
  m.validate();
  return m;
}

LindbladModel LindbladModel::diagonal(int n_qubits, double kappa, Eigen::VectorXd diag) {
  LindbladModel m;
  m.n_qubits = n_qubits;
  m.kappa = kappa;
  m.h_diag = std::move(diag);
  m.validate();
  return m;
}

LindbladModel LindbladModel::dense(int n_qubits, double kappa, Matrix h) {
  LindbladModel m;
  m.n_qubits = n_qubits;
  m.kappa = kappa;
  m.h_dense = std::move(h);
  m.validate();
  return m;
}

LindbladModel LindbladModel::from_chain(const perturb::ChainModel& chain, double kappa) {
  if (chain.z_only())
    return diagonal(chain.n_qubits, kappa, perturb::chain_diagonal(chain));
  return dense(chain.n_qubits, kappa, perturb::build_chain_hamiltonian(chain));
}

Matrix LindbladModel::hamiltonian_matrix() const {
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
  if (h_dense.size() != 0) return h_dense;
  if (h_diag.size() != 0) return Matrix(h_diag.cast<Complex>().asDiagonal());
  return Matrix::Zero(dim, dim);
}

void LindbladModel::validate() const {
  require(n_qubits >= 1, "LindbladModel: need at least one qubit");
  require(kappa >= 0, "LindbladModel: kappa must be >= 0");
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n_qubits;
  require(h_diag.size() == 0 || h_diag.size() == dim, "LindbladModel: bad diagonal size");
  require(h_dense.size() == 0 || (h_dense.rows() == dim && h_dense.cols() == dim),
          "LindbladModel: bad Hamiltonian size");
  require(h_diag.size() == 0 || h_dense.size() == 0,
          "LindbladModel: choose one Hamiltonian form");
  if (h_dense.size() != 0)
    require(qcore::is_hermitian(h_dense, 1e-10), "LindbladModel: H must be Hermitian");
}

void Protocol::validate() const {
  require(flip_interval >= 0, "Protocol: flip interval must be >= 0");
  require(recovery_time >= 0, "Protocol: recovery time must be >= 0");
  if (swap_every != 0) {
    require(flip_interval > 0, "Protocol: swaps require a flip grid");
    require(swap_every >= 2, "Protocol: m must be >= 2");
    require(swap_every % 2 == 0, "Protocol: m must be even");
  }
}

double recovery_duration(int n_physical) {
  require(n_physical >= 2, "recovery_duration: need n >= 2");
  return 1.5 * (n_physical - 1) + 2.0;
}

// ---------------------------------------------------------------------------
// Event reconstruction

std::vector<Event> schedule_events(const Protocol& protocol, double total_time,
                                   const std::vector<JumpEvent>& jumps) {
  protocol.validate();
  for (std::size_t i = 1; i < jumps.size(); ++i)
    require(jumps[i].time > jumps[i - 1].time, "schedule_events: jump times must increase");

  std::vector<Event> events;
  // Jump / recovery chronology first.
  double window_end = -kInf;
  bool dead = false;
  double dead_time = kInf;
  for (const auto& j : jumps) {
    if (j.time > total_time) break;
    if (protocol.recovery && j.time < window_end) {
      events.push_back({j.time, EventKind::Uncorrectable, j.qubit});
      dead = true;
      dead_time = j.time;
      break;
    }
    events.push_back({j.time, EventKind::Jump, j.qubit});
    if (protocol.recovery) {
      window_end = j.time + protocol.recovery_time;
      if (window_end <= total_time)
        events.push_back({window_end, EventKind::RecoveryEnd, j.qubit});
    }
  }

  auto inside_window = [&](double t) {
    if (!protocol.recovery) return false;
    for (const auto& j : jumps) {
      if (j.time > total_time || j.time >= dead_time) break;
      if (t > j.time && t < j.time + protocol.recovery_time) return true;
    }
    return false;
  };

  const double eps = 1e-9 * std::max(1.0, total_time);
  if (protocol.flip_interval > 0) {
    for (long k = 1; k * protocol.flip_interval <= total_time + eps; ++k) {
      const double t = k * protocol.flip_interval;
      if (t > dead_time) break;
      if (inside_window(t)) continue;
      if (protocol.swap_every > 0 && k % protocol.swap_every == 0) {
        events.push_back({t, EventKind::Flip, -1});
        events.push_back({t, EventKind::Swap, -1});
      } else {
        events.push_back({t, EventKind::Flip, -1});
      }
    }
  }

  auto priority = [](EventKind k) {
    switch (k) {
      case EventKind::Jump: return 0;
      case EventKind::Uncorrectable: return 0;
      case EventKind::RecoveryEnd: return 1;
      case EventKind::Flip: return 2;
      case EventKind::Swap: return 3;
    }
    return 4;
  };
  std::stable_sort(events.begin(), events.end(), [&](const Event& a, const Event& b) {
    if (std::abs(a.time - b.time) > eps) return a.time < b.time;
    return priority(a.kind) < priority(b.kind);
  });
  if (dead) {
    // nothing after the uncorrectable event
    auto it = std::find_if(events.begin(), events.end(), [&](const Event& e) {
      return e.kind == EventKind::Uncorrectable;
    });
    events.erase(it + 1, events.end());
  }
  return events;
}

// ---------------------------------------------------------------------------
// Single trajectory

TrajectoryRecord evolve_trajectory(const LindbladModel& model, const Protocol& protocol,
                                   const StateVector& psi0, double total_time,
                                   int grid_points, RngStream& rng_jump,
                                   RngStream& rng_pulse) {
  model.validate();
  protocol.validate();
  require(total_time > 0, "evolve_trajectory: total_time must be > 0");
  require(grid_points >= 2, "evolve_trajectory: need at least two grid points");
  require(psi0.qubits() == model.n_qubits, "evolve_trajectory: register size mismatch");
  require(std::abs(psi0.norm() - 1.0) < 1e-9, "evolve_trajectory: psi0 not normalized");

  const int n = model.n_qubits;
  const Eigen::Index dim = psi0.dim();
  const Drift drift(model);
  const qcore::PauliString flip = jumpcode::flip_operator(n);
  jumpcode::PermutationTracker tracker = jumpcode::PermutationTracker::identity(n);

  const double grid_dt = total_time / (grid_points - 1);
  const double tau = protocol.flip_interval;
  const double swap_dt = protocol.swap_interval();
  const double eps = 1e-9 * std::max(1.0, total_time);

  TrajectoryRecord rec;
  rec.times.reserve(static_cast<std::size_t>(grid_points));
  rec.fidelity.reserve(static_cast<std::size_t>(grid_points));
  rec.jump_counts.reserve(static_cast<std::size_t>(grid_points));
  rec.final_state = psi0;

  CVector psi = psi0.amps();      // un-normalized between jumps
  CVector psi_ref = psi0.amps();  // pulses only
  CVector scratch;

  double t = 0;
  long k_flip = 1, k_swap = 1;
  int k_grid = 0;
  bool window_active = false;
  int window_qubit = -1;
  double window_end = kInf;
  double u = rng_jump.uniform();

  auto sample = [&]() {
    const double n2 = psi.squaredNorm();
    const Complex ov = psi_ref.dot(psi);
    rec.times.push_back(k_grid * grid_dt);
    rec.fidelity.push_back(std::norm(ov) / n2);
    rec.jump_counts.push_back(static_cast<int>(rec.jumps.size()));
    ++k_grid;
  };
  sample();  // t = 0

  auto total_rate2 = [&](const CVector& v) {
    // sum_k ||L_k v||^2 = kappa * <v|N_ex|v>
    double r = 0;
    for (Eigen::Index i = 0; i < dim; ++i)
      r += std::norm(v[i]) * std::popcount(static_cast<std::uint64_t>(i));
    return model.kappa * r;
  };

  while (true) {
    const double next_flip = tau > 0 ? k_flip * tau : kInf;
    const double next_swap = swap_dt > 0 ? k_swap * swap_dt : kInf;
    const double next_grid = k_grid < grid_points ? k_grid * grid_dt : kInf;
    const double t_next =
        std::min({next_flip, next_swap, next_grid, window_end, total_time});
    if (t >= total_time - eps && k_grid >= grid_points) break;

    // Drift toward t_next; a jump restarts the outer loop.
    bool jumped = false;
    if (t_next > t + 1e-15) {
      const double seg = t_next - t;
      const double s_end = drift.norm2_after(psi, seg);
      if (s_end >= u || total_rate2(psi) <= 0) {
        drift.advance(psi, seg, scratch);
        psi.swap(scratch);
        t = t_next;
      } else {
        // waiting-time inversion by bisection on the monotone norm
        double lo = 0, hi = seg;
        for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, seg); ++it) {
          const double mid = 0.5 * (lo + hi);
          (drift.norm2_after(psi, mid) >= u ? lo : hi) = mid;
        }
        const double s_jump = 0.5 * (lo + hi);
        drift.advance(psi, s_jump, scratch);
        psi.swap(scratch);
        t += s_jump;

        // pick the decayed qubit with probability ||L_k psi||^2 / total
        std::vector<double> rates(static_cast<std::size_t>(n), 0.0);
        for (Eigen::Index i = 0; i < dim; ++i) {
          const double w = std::norm(psi[i]);
          if (w == 0) continue;
          for (int q = 0; q < n; ++q)
            if (qcore::bit_of(static_cast<std::uint64_t>(i), n, q))
              rates[static_cast<std::size_t>(q)] += w;
        }
        double total = 0;
        for (double r : rates) total += r;
        const double pick = rng_jump.uniform() * total;
        int qubit = n - 1;
        double acc = 0;
        for (int q = 0; q < n; ++q) {
          acc += rates[static_cast<std::size_t>(q)];
          if (pick < acc) {
            qubit = q;
            break;
          }
        }

        // apply L_qubit and renormalize
        const std::uint64_t bit = 1ULL << qcore::bit_position(n, qubit);
        CVector post = CVector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
          const auto idx = static_cast<std::uint64_t>(i);
          if (idx & bit) post[static_cast<Eigen::Index>(idx & ~bit)] = psi[i];
        }
        post /= post.norm();
        psi.swap(post);
        u = rng_jump.uniform();

        rec.jumps.push_back({t, qubit});
        rec.applied.push_back({t, EventKind::Jump, qubit});
        if (protocol.recovery) {
          if (window_active) {
            rec.failed = true;
            rec.failed_time = t;
            rec.applied.back().kind = EventKind::Uncorrectable;
            break;
          }
          window_active = true;
          window_qubit = qubit;
          window_end = t + protocol.recovery_time;
        }
        jumped = true;
      }
    }
    if (jumped) continue;

    // Events at t_next, in order: recovery end, grid sample, flip, swap.
    if (window_active && std::abs(t - window_end) <= eps) {
      jumpcode::apply_recovery_inplace(psi, n, window_qubit);
      rec.applied.push_back({t, EventKind::RecoveryEnd, window_qubit});
      window_active = false;
      window_qubit = -1;
      window_end = kInf;
    }
    if (k_grid < grid_points && std::abs(t - k_grid * grid_dt) <= eps) sample();
    if (tau > 0 && std::abs(t - k_flip * tau) <= eps) {
      if (!window_active) {
        flip.apply(psi);
        flip.apply(psi_ref);
        rec.applied.push_back({t, EventKind::Flip, -1});
      }
      ++k_flip;
    }
    if (swap_dt > 0 && std::abs(t - k_swap * swap_dt) <= eps) {
      if (!window_active) {
        const auto layer = jumpcode::random_swap_layer(tracker, rng_pulse, n);
        jumpcode::apply_permutation_inplace(psi, n, layer.permutation);
        jumpcode::apply_permutation_inplace(psi_ref, n, layer.permutation);
        rec.applied.push_back({t, EventKind::Swap, -1});
      }
      ++k_swap;
    }
  }

  if (rec.failed) {  // fidelity pinned to zero from the failure on
    while (k_grid < grid_points) {
      rec.times.push_back(k_grid * grid_dt);
      rec.fidelity.push_back(0.0);
      rec.jump_counts.push_back(static_cast<int>(rec.jumps.size()));
      ++k_grid;
    }
  }

  const double n2 = psi.squaredNorm();
  rec.final_state = StateVector(n, psi / std::sqrt(n2));
  return rec;
}

// ---------------------------------------------------------------------------
// Ensembles

EnsembleCurve run_ensemble(const EnsembleSpec& spec) {
  require(spec.trajectories >= 1, "run_ensemble: need at least one trajectory");
  require(spec.model != nullptr, "run_ensemble: missing model factory");
  const int m = spec.trajectories;
  const int g = spec.grid_points;

  std::vector<std::vector<double>> fid(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> jumps(static_cast<std::size_t>(m));

  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      RngStream rng_jump = RngStream::child(spec.master_seed, static_cast<std::uint64_t>(i), 0);
      RngStream rng_pulse = RngStream::child(spec.master_seed, static_cast<std::uint64_t>(i), 1);
      RngStream rng_model = RngStream::child(spec.master_seed, static_cast<std::uint64_t>(i), 2);
      const LindbladModel model = spec.model(rng_model);
      TrajectoryRecord rec = evolve_trajectory(model, spec.protocol, spec.psi0,
                                               spec.total_time, g, rng_jump, rng_pulse);
      fid[static_cast<std::size_t>(i)] = std::move(rec.fidelity);
      jumps[static_cast<std::size_t>(i)] = std::move(rec.jump_counts);
    }
  };

  const int threads = std::max(1, std::min(spec.threads, m));
  if (threads == 1) {
    work(0, m);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (m + threads - 1) / threads;
    for (int r = 0; r < threads; ++r) {
      const int b = r * chunk, e = std::min(m, b + chunk);
      if (b >= e) break;
      pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  EnsembleCurve curve;
  curve.trajectories = m;
  curve.times.resize(static_cast<std::size_t>(g));
  curve.mean.assign(static_cast<std::size_t>(g), 0.0);
  curve.std_error.assign(static_cast<std::size_t>(g), 0.0);
  curve.jumps_mean.assign(static_cast<std::size_t>(g), 0.0);
  const double dt = spec.total_time / (g - 1);
  for (int j = 0; j < g; ++j) curve.times[static_cast<std::size_t>(j)] = j * dt;

  std::vector<double> sum(static_cast<std::size_t>(g), 0.0), sum2(static_cast<std::size_t>(g), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < g; ++j) {
      const double f = fid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      sum[static_cast<std::size_t>(j)] += f;
      sum2[static_cast<std::size_t>(j)] += f * f;
      curve.jumps_mean[static_cast<std::size_t>(j)] +=
          jumps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  for (int j = 0; j < g; ++j) {
    const auto js = static_cast<std::size_t>(j);
    curve.mean[js] = sum[js] / m;
    curve.jumps_mean[js] /= m;
    if (m > 1) {
      const double var = std::max(0.0, (sum2[js] - sum[js] * sum[js] / m) / (m - 1));
      curve.std_error[js] = std::sqrt(var / m);
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Dense master-equation oracle

Matrix integrate_lindblad_rk4(const LindbladModel& model, const Matrix& rho0,
                              double total_time, int steps) {
  model.validate();
  require(steps >= 1, "integrate_lindblad_rk4: steps must be >= 1");
  const int n = model.n_qubits;
  const Eigen::Index dim = static_cast<Eigen::Index>(1) << n;
  require(rho0.rows() == dim && rho0.cols() == dim, "integrate_lindblad_rk4: bad rho0");

  const Matrix h = model.hamiltonian_matrix();
  std::vector<Matrix> lk;
  for (int q = 0; q < n; ++q) {
    Matrix l = Matrix::Zero(dim, dim);
    const std::uint64_t bit = 1ULL << qcore::bit_position(n, q);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(dim); ++i)
      if (i & bit)
        l(static_cast<Eigen::Index>(i & ~bit), static_cast<Eigen::Index>(i)) =
            std::sqrt(model.kappa);
    lk.push_back(std::move(l));
  }
  Matrix n_ex = Matrix::Zero(dim, dim);  // sum_k L^dag L = kappa * N_ex
  for (Eigen::Index i = 0; i < dim; ++i)
    n_ex(i, i) = model.kappa *
                 static_cast<double>(std::popcount(static_cast<std::uint64_t>(i)));

  auto deriv = [&](const Matrix& rho) {
    Matrix d = Complex(0, -1) * (h * rho - rho * h);
    for (const auto& l : lk) d += l * rho * l.adjoint();
    d -= 0.5 * (n_ex * rho + rho * n_ex);
    return d;
  };

  const double dt = total_time / steps;
  Matrix rho = rho0;
  for (int s = 0; s < steps; ++s) {
    const Matrix k1 = deriv(rho);
    const Matrix k2 = deriv(rho + 0.5 * dt * k1);
    const Matrix k3 = deriv(rho + 0.5 * dt * k2);
    const Matrix k4 = deriv(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

}  // namespace qstab::trajectory
