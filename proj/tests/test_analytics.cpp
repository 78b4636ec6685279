#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qstab/analytics.hpp"
#include "qstab/experiments.hpp"
#include "qstab/jumpcode.hpp"
#include "qstab/perturb.hpp"
#include "qstab/trajectory.hpp"

using namespace qstab;

TEST_CASE("p_no_decay values") {
  CHECK(analytics::p_no_decay(3, 0.1, 0) == doctest::Approx(1.0));
  CHECK(analytics::p_no_decay(4, 0.25, 1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("f_jumpcode values") {
  CHECK(analytics::f_jumpcode(8, 1e-3, 12.5, 0) == doctest::Approx(1.0));
  // (8e-3/2)^2 * 12.5 * 2000 = 0.4
  CHECK(analytics::f_jumpcode(8, 1e-3, 12.5, 2000.0) ==
        doctest::Approx(std::exp(-0.4)).epsilon(1e-12));
  CHECK(analytics::expected_jumps(8, 1e-3, 2000.0) == doctest::Approx(8.0));
}

TEST_CASE("f_coherent degenerate cases") {
  CHECK(analytics::f_coherent(0.0, 4.0, 1.0, 0.2) == doctest::Approx(1.0));
  for (double t : {10.0, 100.0, 1000.0})
    CHECK(analytics::f_coherent(t, 4.0, 0.5, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("f_combined reduces to its factors") {
  const int n_q = 8;
  const double t_rec = 12.5, dt = 4.0, c2 = 3e-7, c3 = 1e-8;
  for (double t : {0.0, 123.0, 1717.0}) {
    CHECK(analytics::f_combined(n_q, 0.0, t_rec, dt, c2, c3, t) ==
          doctest::Approx(analytics::f_coherent(t, dt, c2, c3)).epsilon(1e-12));
    CHECK(analytics::f_combined(n_q, 1e-3, t_rec, dt, c2, c2, t) ==
          doctest::Approx(analytics::f_jumpcode(n_q, 1e-3, t_rec, t)).epsilon(1e-12));
  }
}

TEST_CASE("curves start at one and decrease") {
  const double params[][2] = {{1e-3, 12.5}};
  (void)params;
  double prev_c = 2, prev_j = 2, prev_f = 2;
  for (int i = 0; i <= 20; ++i) {
    const double t = 100.0 * i;
    const double c = analytics::f_combined(8, 1e-3, 12.5, 4.0, 3e-7, 1e-8, t);
    const double j = analytics::f_jumpcode(8, 1e-3, 12.5, t);
    const double f = analytics::frahm_decay(t, 5e4, 2.0, 256.0);
    CHECK(c <= prev_c);
    CHECK(j <= prev_j);
    CHECK(f <= prev_f);
    CHECK(c >= 0);
    CHECK(c <= 1);
    prev_c = c;
    prev_j = j;
    prev_f = f;
  }
}

TEST_CASE("frahm limits") {
  CHECK(analytics::frahm_decay(0, 10, 1, 16) == doctest::Approx(1.0));
  // sigma -> infinity leaves the pure linear exponent
  CHECK(analytics::frahm_decay(5, 10, 1e12, 16) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("parec bound variants") {
  CHECK(analytics::parec_bound(0, 12, 1e-6) == doctest::Approx(1.0));
  // GUE with tr{dH^2}/N = delta^2 (1 - 1/N^2) at t = 1
  const double delta = 1e-3, n = 16;
  const double tr = delta * delta * (1.0 - 1.0 / (n * n));
  CHECK(analytics::parec_bound(1, 12, tr) ==
        doctest::Approx(1.0 - 4.0 * 12 * delta * delta * (1.0 - 1.0 / (n * n))));
  // equal intervals dt_j = dt, dt_bb = dt reproduce the (2 dt)^2 form
  const std::vector<double> dts(12, 0.5);
  CHECK(analytics::parec_bound_unequal_intervals(3, tr, dts, 0.5) ==
        doctest::Approx(1.0 - 3.0 * tr * 12 * 1.0));
  CHECK(analytics::parec_bound_once_per_iteration(2, 12, tr) ==
        doctest::Approx(1.0 - 2.0 * 169.0 * tr));
}

TEST_CASE("bound scaling monomials") {
  CHECK(analytics::bound_scaling("NRD", 3.0, 0.5, 2.0) == doctest::Approx(6.0));
  CHECK(analytics::bound_scaling("PDD", 3.0, 0.5, 2.0) ==
        doctest::Approx(9.0 * 0.25 * 16.0));
  // halving T_c in EMD reduces the monomial 8x
  const double full = analytics::bound_scaling("EMD", 2.0, 1.0, 1.0);
  const double half = analytics::bound_scaling("EMD", 2.0, 0.5, 1.0);
  CHECK(full / half == doctest::Approx(8.0));
  CHECK_THROWS_AS(analytics::bound_scaling("XYZ", 1, 1, 1), std::invalid_argument);
}

TEST_CASE("fitted (t_c, sigma) reproduce a simulated QFT decay within 2% RMS") {
  // simulate the bare iterated QFT under GUE imperfections, averaged over
  // draws, then fit ln F = -t/t_c - 2 t^2 / (sigma t_c N) by least squares
  const int n_q = 4, t_max = 30, draws = 24;
  const double delta = 7e-3;
  const double dim = 16.0;
  std::vector<double> mean(static_cast<std::size_t>(t_max), 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto scan = experiments::parec_fidelity_scan(
        n_q, delta, t_max, 1, 600 + static_cast<std::uint64_t>(d));
    for (int t = 0; t < t_max; ++t)
      mean[static_cast<std::size_t>(t)] += scan.bare[static_cast<std::size_t>(t)];
  }
  for (auto& f : mean) f /= draws;

  // linear least squares in (x, y) for -ln F = x t + y t^2
  double s_tt = 0, s_tq = 0, s_qq = 0, b_t = 0, b_q = 0;
  for (int t = 1; t <= t_max; ++t) {
    const double y = -std::log(mean[static_cast<std::size_t>(t - 1)]);
    const double q = static_cast<double>(t) * t;
    s_tt += static_cast<double>(t) * t;
    s_tq += t * q;
    s_qq += q * q;
    b_t += t * y;
    b_q += q * y;
  }
  const double det = s_tt * s_qq - s_tq * s_tq;
  const double x = (b_t * s_qq - b_q * s_tq) / det;
  const double yq = (s_tt * b_q - s_tq * b_t) / det;
  const double t_c = 1.0 / x;
  const double sigma = 2.0 / (yq * t_c * dim);

  double rms = 0;
  for (int t = 1; t <= t_max; ++t) {
    const double model = analytics::frahm_decay(t, t_c, sigma, dim);
    const double diff = model - mean[static_cast<std::size_t>(t - 1)];
    rms += diff * diff;
  }
  rms = std::sqrt(rms / t_max);
  CHECK(mean[static_cast<std::size_t>(t_max - 1)] < 0.9);  // visible decay
  CHECK(rms < 0.02);
}

TEST_CASE("f_coherent slope matches a swap-decoupled unitary simulation") {
  // kappa = 0 memory on n_P = 8 with flip+swap decoupling; uniform chain
  // draws; theory slope dt * <c2 - c3> with c3 evaluated for the uniform
  // codeword superposition by enumerating S_8 on the pair-word structure.
  const int n_l = 3;
  const auto code = jumpcode::build_code(n_l);
  const int n_p = code.n_physical;
  const double eps = 2e-3, delta_t = 4.0, t_max = 2000.0;
  const int trajectories = 300;

  trajectory::EnsembleSpec spec;
  spec.trajectories = trajectories;
  spec.master_seed = 601;
  spec.total_time = t_max;
  spec.grid_points = 11;
  spec.protocol.flip_interval = delta_t / 2;
  spec.protocol.swap_every = 2;
  spec.psi0 = experiments::encoded_plus_state(code);
  spec.model = [n_p, eps](RngStream& rng) {
    return trajectory::LindbladModel::from_chain(
        perturb::sample_uniform_chain(n_p, eps, rng), 0.0);
  };
  const auto curve = trajectory::run_ensemble(spec);

  // c3 for the uniform pair-word state: x_P = -sum_j J_j [sigma maps coupling
  // j inside one physical pair]; average x_P^2 over all permutations.
  auto c3_uniform = [&](const perturb::ChainModel& chain) {
    std::vector<int> perm(static_cast<std::size_t>(n_p));
    std::iota(perm.begin(), perm.end(), 0);
    double acc = 0;
    long count = 0;
    do {
      double x = 0;
      for (int j = 0; j + 1 < n_p; ++j) {
        const int a = perm[static_cast<std::size_t>(j)];
        const int b = perm[static_cast<std::size_t>(j + 1)];
        if (a / 2 == b / 2) x -= chain.jz[j];
      }
      acc += x * x;
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / static_cast<double>(count);
  };

  double theory = 0;
  for (int i = 0; i < trajectories; ++i) {
    RngStream rng = RngStream::child(601, static_cast<std::uint64_t>(i), 2);
    const auto chain = perturb::sample_uniform_chain(n_p, eps, rng);
    const auto cc = jumpcode::code_constants(chain, code);
    theory += cc.c2 - c3_uniform(chain);
  }
  theory = delta_t * theory / trajectories;

  // least-squares slope of -ln F(t) through the origin
  double num = 0, den = 0;
  for (std::size_t g = 1; g < curve.times.size(); ++g) {
    num += curve.times[g] * (-std::log(curve.mean[g]));
    den += curve.times[g] * curve.times[g];
  }
  const double slope = num / den;
  CHECK(curve.mean.back() < 0.85);  // visible decay
  CHECK(slope == doctest::Approx(theory).epsilon(0.10));
}

TEST_CASE("nrd memory bound specialization") {
  CHECK(analytics::nrd_memory_bound(10.0, 0.1, 1e-4) ==
        doctest::Approx(1.0 - 1e-4));
}
