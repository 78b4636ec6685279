#include "qstab/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "qstab/perturb.hpp"

namespace qstab::experiments {

namespace fs = std::filesystem;
using qcore::StateVector;

// ---------------------------------------------------------------------------
// Formatting / file helpers

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(int v) { return std::to_string(v); }

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail_field(field, "must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail_field(field, "must be an integer");
  return v.get<int>();
}

void check_min(double v, double lo, const std::string& field) {
  if (v < lo) fail_field(field, "must be >= " + fmt(lo));
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment catalog and parameter schemas

std::vector<std::pair<std::string, std::string>> list_experiments() {
  return {
      {"correlation-matrix",
       "closed-form GUE-averaged correlation matrix of the QFT gate sequence"},
      {"parec-fidelity",
       "iterated QFT under a fixed GUE imperfection, PAREC on/off plus bound"},
      {"nrd-memory", "random-decoupling quantum memory, mean fidelity trace"},
      {"decouple-scaling",
       "fidelity traces for the PDD/SDD/NRD/EMD/SEMD/RANDOM_PATH schedules"},
      {"jumpcode-recovery", "post-recovery fidelity for every jump position"},
      {"combined-figure5",
       "four-curve quantum-memory comparison with analytic overlays"},
      {"analytic-curves", "closed-form fidelity predictions sampled on a grid"},
      {"constants-check",
       "closed-form c1/c2/p'-difference vs exhaustive permutation averages"},
  };
}

namespace {

json param_defaults(const std::string& experiment) {
  if (experiment == "correlation-matrix")
    return {{"n_qubits", 4}, {"delta", 1e-3}};
  if (experiment == "parec-fidelity")
    return {{"n_qubits", 4}, {"delta", 1e-3}, {"iterations", 50}, {"realizations", 200}};
  if (experiment == "nrd-memory")
    return {{"n_qubits", 4},     {"steps", 100},       {"delta_t", 0.05},
            {"realizations", 100}, {"hamiltonian", "gue"}, {"epsilon", 1e-3}};
  if (experiment == "decouple-scaling")
    return {{"n_qubits", 2},
            {"schedules", json::array({"PDD", "SDD", "NRD", "EMD", "SEMD", "RANDOM_PATH"})},
            {"steps", 64},
            {"delta_t", 0.05},
            {"realizations", 50}};
  if (experiment == "jumpcode-recovery") return {{"n_logical", 2}, {"phi", 0.0}};
  if (experiment == "combined-figure5")
    return {{"n_logical", 3}, {"kappa", 1e-3}, {"epsilon", 1e-4}, {"delta_t", 4.0},
            {"m", 2},         {"t_max", 2000.0}, {"grid", 101},   {"trajectories", 100}};
  if (experiment == "analytic-curves")
    return {{"n_q", 8},       {"kappa", 1e-3}, {"epsilon", 1e-4}, {"delta_t", 4.0},
            {"t_rec", -1.0},  {"c2", -1.0},    {"c3", -1.0},      {"n1", -1.0},
            {"t_max", 2000.0}, {"points", 101}, {"t_c", 0.0},      {"sigma", 1.0}};
  if (experiment == "constants-check")
    return {{"n_physical", json::array({4, 6, 8})}, {"draws", 20}, {"epsilon", 1e-4}};
  throw std::invalid_argument("unknown experiment: " + experiment);
}

json merge_params(const std::string& experiment, const json& user) {
  json out = param_defaults(experiment);
  if (user.is_null()) return out;
  if (!user.is_object()) fail_field("params", "must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!out.contains(it.key()))
      fail_field("params." + it.key(), "unknown field for experiment " + experiment);
    const json& dv = out[it.key()];
    const json& uv = it.value();
    if (dv.is_number_integer() && !uv.is_number_integer())
      fail_field("params." + it.key(), "must be an integer");
    if (dv.is_number_float() && !uv.is_number())
      fail_field("params." + it.key(), "must be a number");
    if (dv.is_string() && !uv.is_string())
      fail_field("params." + it.key(), "must be a string");
    if (dv.is_array() && !uv.is_array())
      fail_field("params." + it.key(), "must be an array");
    out[it.key()] = uv;
  }
  return out;
}

void validate_params(const std::string& experiment, const json& p) {
  auto num = [&](const char* k) { return as_number(p.at(k), std::string("params.") + k); };
  auto intval = [&](const char* k) { return as_int(p.at(k), std::string("params.") + k); };

  if (experiment == "correlation-matrix") {
    if (intval("n_qubits") < 1 || intval("n_qubits") > 10)
      fail_field("params.n_qubits", "must be in [1, 10]");
    if (num("delta") <= 0) fail_field("params.delta", "must be > 0");
  } else if (experiment == "parec-fidelity") {
    if (intval("n_qubits") < 2 || intval("n_qubits") > 8)
      fail_field("params.n_qubits", "must be in [2, 8]");
    if (num("delta") <= 0) fail_field("params.delta", "must be > 0");
    if (intval("iterations") < 1) fail_field("params.iterations", "must be >= 1");
    if (intval("realizations") < 1) fail_field("params.realizations", "must be >= 1");
  } else if (experiment == "nrd-memory") {
    if (intval("n_qubits") < 1 || intval("n_qubits") > 8)
      fail_field("params.n_qubits", "must be in [1, 8]");
    if (intval("steps") < 1) fail_field("params.steps", "must be >= 1");
    if (num("delta_t") <= 0) fail_field("params.delta_t", "must be > 0");
    if (intval("realizations") < 1) fail_field("params.realizations", "must be >= 1");
    const std::string h = p.at("hamiltonian").get<std::string>();
    if (h != "gue" && h != "chain")
      fail_field("params.hamiltonian", "must be \"gue\" or \"chain\"");
    check_min(num("epsilon"), 0.0, "params.epsilon");
  } else if (experiment == "decouple-scaling") {
    if (intval("n_qubits") < 1 || intval("n_qubits") > 6)
      fail_field("params.n_qubits", "must be in [1, 6]");
    if (intval("steps") < 1) fail_field("params.steps", "must be >= 1");
    if (num("delta_t") <= 0) fail_field("params.delta_t", "must be > 0");
    if (intval("realizations") < 1) fail_field("params.realizations", "must be >= 1");
    for (const auto& s : p.at("schedules"))
      decouple::kind_from_name(s.get<std::string>());  // throws on bad names
  } else if (experiment == "jumpcode-recovery") {
    if (intval("n_logical") < 1 || intval("n_logical") > 5)
      fail_field("params.n_logical", "must be in [1, 5]");
  } else if (experiment == "combined-figure5") {
    if (intval("n_logical") < 1 || intval("n_logical") > 3)
      fail_field("params.n_logical", "must be in [1, 3]");
    check_min(num("kappa"), 0.0, "params.kappa");
    check_min(num("epsilon"), 0.0, "params.epsilon");
    if (num("delta_t") <= 0) fail_field("params.delta_t", "must be > 0");
    const int m = intval("m");
    if (m < 2 || m % 2 != 0) fail_field("params.m", "must be an even integer >= 2");
    if (num("t_max") <= 0) fail_field("params.t_max", "must be > 0");
    if (intval("grid") < 2) fail_field("params.grid", "must be >= 2");
    if (intval("trajectories") < 1) fail_field("params.trajectories", "must be >= 1");
  } else if (experiment == "analytic-curves") {
    if (intval("n_q") < 2) fail_field("params.n_q", "must be >= 2");
    check_min(num("kappa"), 0.0, "params.kappa");
    check_min(num("epsilon"), 0.0, "params.epsilon");
    if (num("delta_t") <= 0) fail_field("params.delta_t", "must be > 0");
    if (num("t_max") <= 0) fail_field("params.t_max", "must be > 0");
    if (intval("points") < 2) fail_field("params.points", "must be >= 2");
    check_min(num("t_c"), 0.0, "params.t_c");
    if (num("sigma") <= 0) fail_field("params.sigma", "must be > 0");
  } else if (experiment == "constants-check") {
    for (const auto& v : p.at("n_physical")) {
      const int n = as_int(v, "params.n_physical[]");
      if (n < 4 || n > 8 || n % 2 != 0)
        fail_field("params.n_physical", "entries must be even and in [4, 8]");
    }
    if (intval("draws") < 1) fail_field("params.draws", "must be >= 1");
    check_min(num("epsilon"), 0.0, "params.epsilon");
  }
}

}  // namespace

ExperimentConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "experiment" && k != "seed" && k != "threads" && k != "output_dir" &&
        k != "params")
      fail_field(k, "unknown top-level field");
  }
  if (!j.contains("experiment")) fail_field("experiment", "missing");
  ExperimentConfig cfg;
  if (!j.at("experiment").is_string()) fail_field("experiment", "must be a string");
  cfg.experiment = j.at("experiment").get<std::string>();
  param_defaults(cfg.experiment);  // validates the name
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      fail_field("seed", "must be a non-negative integer");
    const auto s = j.at("seed").get<long long>();
    if (s < 0) fail_field("seed", "must be a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("threads")) {
    cfg.threads = as_int(j.at("threads"), "threads");
    if (cfg.threads < 1) fail_field("threads", "must be >= 1");
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) fail_field("output_dir", "must be a string");
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  cfg.params = merge_params(cfg.experiment, j.contains("params") ? j.at("params") : json());
  validate_params(cfg.experiment, cfg.params);
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

json resolved_json(const ExperimentConfig& config) {
  return json{{"experiment", config.experiment},
              {"seed", config.seed},
              {"threads", config.threads},
              {"output_dir", config.output_dir},
              {"params", config.params}};
}

// ---------------------------------------------------------------------------
// States

StateVector coherent_pair_state(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("coherent_pair_state: empty register");
  if (n_qubits == 1) {  // single qubit: the |+> superposition
    CVector amps(2);
    amps[0] = amps[1] = 1.0 / std::sqrt(2.0);
    return StateVector(1, std::move(amps));
  }
  const std::uint64_t all = (1ULL << n_qubits) - 1;
  const std::uint64_t w1 = all >> 1;                          // 0 1 1 ... 1
  const std::uint64_t w2 = all & ~(1ULL << (n_qubits - 2));   // 1 0 1 ... 1
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(1) << n_qubits);
  amps[static_cast<Eigen::Index>(w1)] = 1.0 / std::sqrt(2.0);
  amps[static_cast<Eigen::Index>(w2)] = 1.0 / std::sqrt(2.0);
  return StateVector(n_qubits, std::move(amps));
}

StateVector encoded_plus_state(const jumpcode::JumpCode& code) {
  StateVector logical(code.n_logical);
  logical.amps().setConstant(Complex(std::pow(2.0, -0.5 * code.n_logical), 0));
  return jumpcode::encode(logical, code);
}

// ---------------------------------------------------------------------------
// Figure 5

Figure5Result run_figure5(const Figure5Params& p) {
  const int n_l = p.n_logical;
  const jumpcode::JumpCode code = jumpcode::build_code(n_l);
  const int n_p = code.n_physical;
  const double tau = p.delta_t / p.m;
  const double t_rec = trajectory::recovery_duration(n_p);

  const StateVector psi_small = coherent_pair_state(n_l);
  const StateVector psi_enc = encoded_plus_state(code);

  auto chain_model = [&](int n_qubits) {
    return [n_qubits, eps = p.epsilon](RngStream& rng) {
      const auto chain = perturb::sample_uniform_chain(n_qubits, eps, rng);
      return trajectory::LindbladModel::from_chain(chain, 0.0);
    };
  };
  // kappa is fixed; the factory owns the disorder draw only
  auto make_spec = [&](int n_qubits, const StateVector& psi0,
                       const trajectory::Protocol& protocol) {
    trajectory::EnsembleSpec spec;
    spec.trajectories = p.trajectories;
    spec.master_seed = p.seed;
    spec.threads = p.threads;
    spec.total_time = p.t_max;
    spec.grid_points = p.grid;
    spec.protocol = protocol;
    spec.psi0 = psi0;
    spec.model = [factory = chain_model(n_qubits), kappa = p.kappa](RngStream& rng) {
      trajectory::LindbladModel m = factory(rng);
      m.kappa = kappa;
      return m;
    };
    return spec;
  };

  trajectory::Protocol off;
  trajectory::Protocol deco;
  deco.flip_interval = tau;
  deco.swap_every = p.m;
  trajectory::Protocol jc;
  jc.recovery = true;
  jc.recovery_time = t_rec;
  trajectory::Protocol both = deco;
  both.recovery = true;
  both.recovery_time = t_rec;

  Figure5Result out;
  out.n_physical = n_p;
  out.t_rec = t_rec;
  out.unprotected = trajectory::run_ensemble(make_spec(n_l, psi_small, off));
  out.decoupled = trajectory::run_ensemble(make_spec(n_l, psi_small, deco));
  out.jumpcode = trajectory::run_ensemble(make_spec(n_p, psi_enc, jc));
  out.combined = trajectory::run_ensemble(make_spec(n_p, psi_enc, both));

  // Swap-averaged constants over the same disorder draws the encoded
  // ensembles see (stream purpose 2 matches run_ensemble).
  double c2 = 0, c1sq = 0, c3u = 0;
  for (int i = 0; i < p.trajectories; ++i) {
    RngStream rng = RngStream::child(p.seed, static_cast<std::uint64_t>(i), 2);
    const auto chain = perturb::sample_uniform_chain(n_p, p.epsilon, rng);
    const auto cc = jumpcode::code_constants(chain, code);
    c2 += cc.c2;
    c1sq += cc.c3_lower;
    c3u += cc.c3_upper;
  }
  out.mean_c2 = c2 / p.trajectories;
  out.mean_c1_sq = c1sq / p.trajectories;
  out.mean_c3_upper = c3u / p.trajectories;

  // mean excitation of the unencoded state
  double n1 = 0;
  for (Eigen::Index i = 0; i < psi_small.dim(); ++i)
    n1 += std::norm(psi_small.amps()[i]) *
          std::popcount(static_cast<std::uint64_t>(i));
  out.n1_unencoded = n1;

  out.analytic_time = out.combined.times;
  for (double t : out.analytic_time) {
    out.f_combined_c1sq.push_back(analytics::f_combined(n_p, p.kappa, t_rec, p.delta_t,
                                                        out.mean_c2, out.mean_c1_sq, t));
    out.f_combined_c3upper.push_back(analytics::f_combined(
        n_p, p.kappa, t_rec, p.delta_t, out.mean_c2, out.mean_c3_upper, t));
    out.f_jumpcode_only.push_back(analytics::f_jumpcode(n_p, p.kappa, t_rec, t));
    out.p_unprotected.push_back(analytics::p_no_decay(n1, p.kappa, t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PAREC fidelity scan

ParecScan parec_fidelity_scan(int n_qubits, double delta, int t_max, int realizations,
                              std::uint64_t seed) {
  const algos::GateSequence seq = algos::build_qft(n_qubits);
  const int n_g = seq.size();
  const Eigen::Index dim = seq.dim();
  const double n = static_cast<double>(dim);

  RngStream rng_h = RngStream::child(seed, 0, 3);
  const perturb::GuePerturbation gue = perturb::sample_gue(dim, rng_h, delta);
  const Matrix dh = delta * gue.matrix;
  const Matrix exp_dh = qcore::unitary_exp(dh);
  const double tr_dh2 = (dh * dh).trace().real() / n;

  const Matrix u = seq.product();

  ParecScan out;
  out.n_gates = n_g;
  out.tr_dh2_over_n = tr_dh2;
  out.iterations.resize(static_cast<std::size_t>(t_max));
  for (int t = 1; t <= t_max; ++t) out.iterations[static_cast<std::size_t>(t - 1)] = t;

  // PAREC off: deterministic product, one exp(-i dH) before each gate.
  {
    Matrix w = Matrix::Identity(dim, dim);
    Matrix u_pow = Matrix::Identity(dim, dim);
    for (int t = 1; t <= t_max; ++t) {
      for (const auto& g : seq.gates) {
        g.left_multiply(w, n_qubits);
        w = exp_dh * w;
      }
      u_pow = u * u_pow;
      const Complex a = qcore::frobenius_inner(u_pow, w) / n;
      out.bare.push_back(std::norm(a));
    }
  }

  // PAREC on: fresh pulses per realization, 2 n_g perturbed gates per
  // iteration, fidelity measured in the closed frame at iteration boundaries.
  std::vector<double> sum(static_cast<std::size_t>(t_max), 0.0);
  std::vector<double> sum2(static_cast<std::size_t>(t_max), 0.0);
  for (int r = 0; r < realizations; ++r) {
    RngStream rng = RngStream::child(seed, static_cast<std::uint64_t>(r), 0);
    const algos::GateSequence parec = algos::parec_transform(seq, t_max, rng);
    Matrix w = Matrix::Identity(dim, dim);
    Matrix u_pow = Matrix::Identity(dim, dim);
    for (int t = 1; t <= t_max; ++t) {
      for (int g = 2 * n_g * (t - 1); g < 2 * n_g * t; ++g) {
        parec.gates[static_cast<std::size_t>(g)].left_multiply(w, n_qubits);
        w = exp_dh * w;
      }
      u_pow = u * u_pow;
      Matrix closed = w;
      algos::Gate closure;
      closure.pauli = parec.parec->frame_after_iteration[static_cast<std::size_t>(t - 1)]
                          .adjoint();
      closure.left_multiply(closed, n_qubits);
      const double f = std::norm(qcore::frobenius_inner(u_pow, closed) / n);
      sum[static_cast<std::size_t>(t - 1)] += f;
      sum2[static_cast<std::size_t>(t - 1)] += f * f;
    }
  }
  for (int t = 1; t <= t_max; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    const double mean = sum[i] / realizations;
    out.parec_mean.push_back(mean);
    double se = 0;
    if (realizations > 1) {
      const double var =
          std::max(0.0, (sum2[i] - sum[i] * sum[i] / realizations) / (realizations - 1));
      se = std::sqrt(var / realizations);
    }
    out.parec_stderr.push_back(se);
    out.bound.push_back(analytics::parec_bound(t, n_g, tr_dh2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// NRD memory scan

MemoryScan nrd_memory_scan(const Matrix& h0, double delta_t, int steps,
                           int realizations, std::uint64_t seed) {
  const auto n_qubits = static_cast<int>(std::llround(std::log2(h0.rows())));
  const decouple::DecouplingSet set = decouple::DecouplingSet::pauli_annihilator(n_qubits);
  decouple::DecouplingSchedule sched;
  sched.kind = decouple::ScheduleKind::NRD;
  sched.dt = delta_t;
  sched.set = set;

  MemoryScan out;
  out.steps.resize(static_cast<std::size_t>(steps));
  out.times.resize(static_cast<std::size_t>(steps));
  std::vector<double> sum(static_cast<std::size_t>(steps), 0.0);
  std::vector<double> sum2(static_cast<std::size_t>(steps), 0.0);
  for (int r = 0; r < realizations; ++r) {
    RngStream rng = RngStream::child(seed, static_cast<std::uint64_t>(r), 0);
    const auto run = decouple::run_schedule(h0, sched, steps * delta_t, rng);
    for (int s = 0; s < steps; ++s) {
      sum[static_cast<std::size_t>(s)] += run.fidelity[static_cast<std::size_t>(s)];
      sum2[static_cast<std::size_t>(s)] +=
          run.fidelity[static_cast<std::size_t>(s)] * run.fidelity[static_cast<std::size_t>(s)];
    }
  }
  for (int s = 0; s < steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    out.steps[i] = s + 1;
    out.times[i] = (s + 1) * delta_t;
    out.mean.push_back(sum[i] / realizations);
    double se = 0;
    if (realizations > 1) {
      const double var = std::max(
          0.0, (sum2[i] - sum[i] * sum[i] / realizations) / (realizations - 1));
      se = std::sqrt(var / realizations);
    }
    out.std_error.push_back(se);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

std::vector<std::string> run_correlation_matrix(const ExperimentConfig& cfg) {
  const int n = cfg.params.at("n_qubits").get<int>();
  const double delta = cfg.params.at("delta").get<double>();
  const auto seq = algos::build_qft(n);
  const auto cm = algos::correlation_matrix_gue_average(seq, delta);
  std::vector<std::string> rows;
  for (int j = 0; j < cm.normalized.rows(); ++j)
    for (int k = 0; k < cm.normalized.cols(); ++k)
      rows.push_back(fmt(j + 1) + "," + fmt(k + 1) + "," + fmt(cm.normalized(j, k)));
  const std::string path = out_path(cfg, "correlation_matrix.csv");
  write_csv(path, "j,k,value", rows);
  return {path};
}

std::vector<std::string> run_parec_fidelity(const ExperimentConfig& cfg) {
  const auto scan = parec_fidelity_scan(
      cfg.params.at("n_qubits").get<int>(), cfg.params.at("delta").get<double>(),
      cfg.params.at("iterations").get<int>(), cfg.params.at("realizations").get<int>(),
      cfg.seed);
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < scan.iterations.size(); ++i) {
    rows.push_back(fmt(scan.iterations[i]) + "," + fmt(scan.parec_mean[i]) + ",parec");
    rows.push_back(fmt(scan.iterations[i]) + "," + fmt(scan.bare[i]) + ",bare");
    rows.push_back(fmt(scan.iterations[i]) + "," + fmt(scan.bound[i]) + ",bound");
  }
  const std::string path = out_path(cfg, "parec_fidelity.csv");
  write_csv(path, "iteration,fidelity,model", rows);
  return {path};
}

std::vector<std::string> run_nrd_memory(const ExperimentConfig& cfg) {
  const int n = cfg.params.at("n_qubits").get<int>();
  Matrix h0;
  if (cfg.params.at("hamiltonian").get<std::string>() == "gue") {
    RngStream rng = RngStream::child(cfg.seed, 0, 3);
    h0 = perturb::sample_gue(static_cast<Eigen::Index>(1) << n, rng).matrix;
  } else {
    RngStream rng = RngStream::child(cfg.seed, 0, 3);
    h0 = perturb::build_chain_hamiltonian(
        perturb::sample_uniform_chain(n, cfg.params.at("epsilon").get<double>(), rng, true));
  }
  const auto scan =
      nrd_memory_scan(h0, cfg.params.at("delta_t").get<double>(),
                      cfg.params.at("steps").get<int>(),
                      cfg.params.at("realizations").get<int>(), cfg.seed);
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < scan.steps.size(); ++i)
    rows.push_back(fmt(scan.steps[i]) + "," + fmt(scan.times[i]) + "," + fmt(scan.mean[i]));
  const std::string path = out_path(cfg, "nrd_memory.csv");
  write_csv(path, "step,time,fidelity", rows);
  return {path};
}

std::vector<std::string> run_decouple_scaling(const ExperimentConfig& cfg) {
  const int n = cfg.params.at("n_qubits").get<int>();
  const int steps = cfg.params.at("steps").get<int>();
  const double dt = cfg.params.at("delta_t").get<double>();
  const int realizations = cfg.params.at("realizations").get<int>();
  RngStream rng_h = RngStream::child(cfg.seed, 0, 3);
  const Matrix h0 = perturb::sample_gue(static_cast<Eigen::Index>(1) << n, rng_h).matrix;
  const auto pauli = decouple::DecouplingSet::pauli_annihilator(n);

  std::vector<std::string> rows;
  for (const auto& name : cfg.params.at("schedules")) {
    const auto kind = decouple::kind_from_name(name.get<std::string>());
    decouple::DecouplingSchedule sched;
    sched.kind = kind;
    sched.dt = dt;
    sched.set = pauli;
    if (kind == decouple::ScheduleKind::EMD || kind == decouple::ScheduleKind::SEMD)
      sched.inner = pauli;
    const int cycle = sched.cycle_steps();
    const int total = ((steps + cycle - 1) / cycle) * cycle;  // whole cycles
    std::vector<double> mean(static_cast<std::size_t>(total), 0.0);
    for (int r = 0; r < realizations; ++r) {
      RngStream rng = RngStream::child(cfg.seed, static_cast<std::uint64_t>(r), 0);
      const auto run = decouple::run_schedule(h0, sched, total * dt, rng);
      for (int s = 0; s < total; ++s)
        mean[static_cast<std::size_t>(s)] += run.fidelity[static_cast<std::size_t>(s)];
    }
    for (int s = 0; s < total; ++s)
      rows.push_back(name.get<std::string>() + "," + fmt(s + 1) + "," + fmt((s + 1) * dt) +
                     "," + fmt(mean[static_cast<std::size_t>(s)] / realizations));
  }
  const std::string path = out_path(cfg, "decouple_scaling.csv");
  write_csv(path, "schedule,step,time,fidelity", rows);
  return {path};
}

std::vector<std::string> run_jumpcode_recovery(const ExperimentConfig& cfg) {
  const int n_l = cfg.params.at("n_logical").get<int>();
  const double phi = cfg.params.at("phi").get<double>();
  const auto code = jumpcode::build_code(n_l, phi);
  RngStream rng = RngStream::child(cfg.seed, 0, 4);
  const StateVector logical = qcore::random_state(n_l, rng);
  const StateVector psi = jumpcode::encode(logical, code);

  std::vector<std::string> rows;
  for (int q = 0; q < code.n_physical; ++q) {
    // jump on qubit q, then recover
    CVector post = CVector::Zero(psi.dim());
    const std::uint64_t bit = 1ULL << qcore::bit_position(code.n_physical, q);
    for (Eigen::Index i = 0; i < psi.dim(); ++i) {
      const auto idx = static_cast<std::uint64_t>(i);
      if (idx & bit) post[static_cast<Eigen::Index>(idx & ~bit)] = psi.amps()[i];
    }
    post /= post.norm();
    StateVector recovered =
        jumpcode::recovery(StateVector(code.n_physical, post), q, code);
    const double f = std::norm(psi.overlap(recovered));
    rows.push_back(fmt(q) + "," + fmt(f));
  }
  const std::string path = out_path(cfg, "jumpcode_recovery.csv");
  write_csv(path, "jump_qubit,fidelity", rows);
  return {path};
}

std::vector<std::string> run_combined_figure5(const ExperimentConfig& cfg) {
  Figure5Params p;
  p.n_logical = cfg.params.at("n_logical").get<int>();
  p.kappa = cfg.params.at("kappa").get<double>();
  p.epsilon = cfg.params.at("epsilon").get<double>();
  p.delta_t = cfg.params.at("delta_t").get<double>();
  p.m = cfg.params.at("m").get<int>();
  p.t_max = cfg.params.at("t_max").get<double>();
  p.grid = cfg.params.at("grid").get<int>();
  p.trajectories = cfg.params.at("trajectories").get<int>();
  p.seed = cfg.seed;
  p.threads = cfg.threads;
  const Figure5Result res = run_figure5(p);

  auto curve_rows = [](const trajectory::EnsembleCurve& c) {
    std::vector<std::string> rows;
    for (std::size_t i = 0; i < c.times.size(); ++i)
      rows.push_back(fmt(c.times[i]) + "," + fmt(c.mean[i]) + "," + fmt(c.std_error[i]) +
                     "," + fmt(c.jumps_mean[i]));
    return rows;
  };
  const std::string header = "time,fidelity_mean,fidelity_stderr,n_jumps_mean";
  std::vector<std::string> files;
  const std::pair<std::string, const trajectory::EnsembleCurve*> curves[] = {
      {"figure5_unprotected.csv", &res.unprotected},
      {"figure5_decoupled.csv", &res.decoupled},
      {"figure5_jumpcode.csv", &res.jumpcode},
      {"figure5_combined.csv", &res.combined},
  };
  for (const auto& [name, curve] : curves) {
    const std::string path = out_path(cfg, name);
    write_csv(path, header, curve_rows(*curve));
    files.push_back(path);
  }
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < res.analytic_time.size(); ++i) {
    const std::string t = fmt(res.analytic_time[i]);
    rows.push_back(t + "," + fmt(res.p_unprotected[i]) + ",no_decay");
    rows.push_back(t + "," + fmt(res.f_jumpcode_only[i]) + ",jumpcode");
    rows.push_back(t + "," + fmt(res.f_combined_c1sq[i]) + ",combined_c1sq");
    rows.push_back(t + "," + fmt(res.f_combined_c3upper[i]) + ",combined_c3upper");
  }
  const std::string path = out_path(cfg, "figure5_analytic.csv");
  write_csv(path, "time,fidelity,model", rows);
  files.push_back(path);
  return files;
}

std::vector<std::string> run_analytic_curves(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int n_q = p.at("n_q").get<int>();
  const double kappa = p.at("kappa").get<double>();
  const double eps = p.at("epsilon").get<double>();
  const double delta_t = p.at("delta_t").get<double>();
  double t_rec = p.at("t_rec").get<double>();
  if (t_rec < 0) t_rec = trajectory::recovery_duration(n_q);
  // uniform-draw expectations when not supplied
  double c2 = p.at("c2").get<double>();
  if (c2 < 0) c2 = (2.0 * n_q - 1.0) * eps * eps;
  double c3 = p.at("c3").get<double>();
  if (c3 < 0) c3 = eps * eps / (n_q - 1.0);
  double n1 = p.at("n1").get<double>();
  if (n1 < 0) n1 = 0.5 * n_q;
  const double t_max = p.at("t_max").get<double>();
  const int points = p.at("points").get<int>();
  const double t_c = p.at("t_c").get<double>();
  const double sigma = p.at("sigma").get<double>();

  std::vector<std::string> rows;
  for (int i = 0; i < points; ++i) {
    const double t = t_max * i / (points - 1);
    const std::string ts = fmt(t);
    rows.push_back(ts + "," + fmt(analytics::p_no_decay(n1, kappa, t)) + ",no_decay");
    rows.push_back(ts + "," + fmt(analytics::f_jumpcode(n_q, kappa, t_rec, t)) +
                   ",jumpcode");
    rows.push_back(ts + "," + fmt(analytics::f_coherent(t, delta_t, c2, c3)) +
                   ",coherent");
    rows.push_back(ts + "," +
                   fmt(analytics::f_combined(n_q, kappa, t_rec, delta_t, c2, c3, t)) +
                   ",combined");
    if (t_c > 0)
      rows.push_back(ts + "," +
                     fmt(analytics::frahm_decay(t, t_c, sigma, std::pow(2.0, n_q))) +
                     ",frahm");
  }
  const std::string path = out_path(cfg, "analytic_curves.csv");
  write_csv(path, "time,fidelity,model", rows);
  return {path};
}

std::vector<std::string> run_constants_check(const ExperimentConfig& cfg) {
  const int draws = cfg.params.at("draws").get<int>();
  const double eps = cfg.params.at("epsilon").get<double>();
  std::vector<std::string> rows;
  for (const auto& nv : cfg.params.at("n_physical")) {
    const int n_p = nv.get<int>();
    const auto code = jumpcode::build_code(n_p / 2 - 1);
    const auto proj = jumpcode::CodespaceProjector::dfs(n_p);
    const double p_oracle = jumpcode::p_diff_counting(n_p);
    for (int d = 0; d < draws; ++d) {
      RngStream rng = RngStream::child(cfg.seed, static_cast<std::uint64_t>(d),
                                       static_cast<std::uint64_t>(n_p));
      const auto chain = perturb::sample_uniform_chain(n_p, eps, rng);
      const auto cc = jumpcode::code_constants(chain, code);

      // brute force over S_n
      const Matrix h = perturb::build_chain_hamiltonian(chain);
      Matrix zz_only = Matrix::Zero(h.rows(), h.cols());
      {
        perturb::ChainModel zz = chain;
        zz.detunings.setZero();
        zz_only = perturb::build_chain_hamiltonian(zz);
      }
      const Matrix avg_h = jumpcode::permutation_average(zz_only, n_p);
      const Matrix avg_h2 = jumpcode::permutation_average(Matrix(h * h), n_p);
      double c1_brute = 0, c2_brute = 0;
      int count = 0;
      for (Eigen::Index i = 0; i < proj.dim; ++i) {
        if (proj.diag[i] == 0) continue;
        c1_brute += avg_h(i, i).real();
        c2_brute += avg_h2(i, i).real();
        ++count;
      }
      c1_brute /= count;
      c2_brute /= count;
      const double err = std::max(std::abs(c1_brute - cc.c1), std::abs(c2_brute - cc.c2));
      rows.push_back(fmt(n_p) + "," + fmt(d) + "," + fmt(cc.c1) + "," + fmt(c1_brute) +
                     "," + fmt(cc.c2) + "," + fmt(c2_brute) + "," + fmt(cc.p_diff) + "," +
                     fmt(p_oracle) + "," + fmt(err));
    }
  }
  const std::string path = out_path(cfg, "constants_check.csv");
  write_csv(path, "n_p,draw,c1_closed,c1_brute,c2_closed,c2_brute,p_diff_closed,p_diff_oracle,max_error",
            rows);
  return {path};
}

}  // namespace

std::vector<std::string> run(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::string> files;
  if (cfg.experiment == "correlation-matrix") files = run_correlation_matrix(cfg);
  else if (cfg.experiment == "parec-fidelity") files = run_parec_fidelity(cfg);
  else if (cfg.experiment == "nrd-memory") files = run_nrd_memory(cfg);
  else if (cfg.experiment == "decouple-scaling") files = run_decouple_scaling(cfg);
  else if (cfg.experiment == "jumpcode-recovery") files = run_jumpcode_recovery(cfg);
  else if (cfg.experiment == "combined-figure5") files = run_combined_figure5(cfg);
  else if (cfg.experiment == "analytic-curves") files = run_analytic_curves(cfg);
  else if (cfg.experiment == "constants-check") files = run_constants_check(cfg);
  else throw std::invalid_argument("unknown experiment: " + cfg.experiment);

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json meta = {{"config", resolved_json(cfg)},
               {"outputs", files},
               {"duration_seconds", seconds},
               {"qstab_version", "0.1.0"}};
  const std::string meta_path = out_path(cfg, cfg.experiment + ".meta.json");
  std::ofstream out(meta_path, std::ios::binary);
  out << meta.dump(2) << "\n";
  files.push_back(meta_path);
  return files;
}

}  // namespace qstab::experiments
