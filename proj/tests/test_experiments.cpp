#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qstab/experiments.hpp"

using namespace qstab;
using experiments::ExperimentConfig;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("experiment catalog lists all eight experiments") {
  const auto list = experiments::list_experiments();
  CHECK(list.size() == 8);
  bool has_fig5 = false;
  for (const auto& [name, desc] : list) {
    CHECK(!desc.empty());
    if (name == "combined-figure5") has_fig5 = true;
  }
  CHECK(has_fig5);
}

TEST_CASE("minimal analytic-curves config parses with defaults") {
  const ExperimentConfig cfg =
      experiments::parse_config_json(json{{"experiment", "analytic-curves"}});
  CHECK(cfg.experiment == "analytic-curves");
  CHECK(cfg.params.at("n_q").get<int>() == 8);
  CHECK(cfg.params.at("kappa").get<double>() == doctest::Approx(1e-3));
  CHECK(cfg.params.at("points").get<int>() == 101);
  CHECK(cfg.threads == 1);
}

TEST_CASE("figure5 config round-trips through serialize/parse") {
  const json in = {{"experiment", "combined-figure5"},
                   {"seed", 99},
                   {"threads", 2},
                   {"params", {{"kappa", 2e-3}, {"trajectories", 10}}}};
  const ExperimentConfig cfg = experiments::parse_config_json(in);
  const json dumped = experiments::resolved_json(cfg);
  const ExperimentConfig again = experiments::parse_config_json(dumped);
  CHECK(experiments::resolved_json(again) == dumped);
  CHECK(again.params.at("kappa").get<double>() == doctest::Approx(2e-3));
  CHECK(again.params.at("m").get<int>() == 2);  // default filled
}

TEST_CASE("schema violations give field-level messages") {
  CHECK_THROWS_WITH_AS(
      experiments::parse_config_json(json{{"experiment", "combined-figure5"},
                                          {"params", {{"kappa", -1.0}}}}),
      "config field 'params.kappa': must be >= 0", std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      experiments::parse_config_json(json{{"experiment", "combined-figure5"},
                                          {"params", {{"bogus", 1}}}}),
      "config field 'params.bogus': unknown field for experiment combined-figure5",
      std::invalid_argument);
  CHECK_THROWS_AS(
      experiments::parse_config_json(json{{"experiment", "no-such-experiment"}}),
      std::invalid_argument);
  CHECK_THROWS_AS(experiments::parse_config_json(json{{"experiment", "nrd-memory"},
                                                      {"unknown_top", 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      experiments::parse_config_json(json{{"experiment", "combined-figure5"},
                                          {"params", {{"m", 3}}}}),
      std::invalid_argument);  // odd m
  CHECK_THROWS_AS(experiments::parse_config(std::string("/no/such/file.json")),
                  std::invalid_argument);
}

TEST_CASE("jumpcode-recovery experiment writes a perfect-fidelity table") {
  TempDir dir("qstab_test_recovery");
  ExperimentConfig cfg = experiments::parse_config_json(
      json{{"experiment", "jumpcode-recovery"},
           {"output_dir", dir.path.string()},
           {"params", {{"n_logical", 2}}}});
  const auto files = experiments::run(cfg);
  REQUIRE(files.size() == 2);  // csv + metadata
  const std::string csv = read_file(files[0]);
  CHECK(csv.rfind("jump_qubit,fidelity\n", 0) == 0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 7);  // header + 6 physical qubits
  // every fidelity is 1 within 1e-10
  std::istringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    const auto comma = line.find(',');
    const double f = std::stod(line.substr(comma + 1));
    CHECK(f > 1.0 - 1e-10);
  }
  // metadata embeds the resolved config
  const json meta = json::parse(read_file(files[1]));
  CHECK(meta.at("config").at("experiment") == "jumpcode-recovery");
  CHECK(meta.at("config").at("params").at("n_logical") == 2);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  TempDir dir_a("qstab_test_det_a");
  TempDir dir_b("qstab_test_det_b");
  const json base = {{"experiment", "combined-figure5"},
                     {"seed", 31},
                     {"params",
                      {{"trajectories", 6},
                       {"t_max", 200.0},
                       {"grid", 5},
                       {"n_logical", 1}}}};
  json a = base;
  a["output_dir"] = dir_a.path.string();
  json b = base;
  b["output_dir"] = dir_b.path.string();
  const auto files_a = experiments::run(experiments::parse_config_json(a));
  const auto files_b = experiments::run(experiments::parse_config_json(b));
  REQUIRE(files_a.size() == files_b.size());
  for (std::size_t i = 0; i + 1 < files_a.size(); ++i) {  // skip metadata (timing)
    CHECK(read_file(files_a[i]) == read_file(files_b[i]));
  }
}

TEST_CASE("figure5 experiment writes the four legend curves plus overlays") {
  TempDir dir("qstab_test_fig5");
  ExperimentConfig cfg = experiments::parse_config_json(
      json{{"experiment", "combined-figure5"},
           {"seed", 5},
           {"output_dir", dir.path.string()},
           {"params",
            {{"trajectories", 4}, {"t_max", 100.0}, {"grid", 3}, {"n_logical", 1}}}});
  const auto files = experiments::run(cfg);
  REQUIRE(files.size() == 6);  // 4 curves + analytic + metadata
  CHECK(fs::path(files[0]).filename() == "figure5_unprotected.csv");
  CHECK(fs::path(files[1]).filename() == "figure5_decoupled.csv");
  CHECK(fs::path(files[2]).filename() == "figure5_jumpcode.csv");
  CHECK(fs::path(files[3]).filename() == "figure5_combined.csv");
  CHECK(fs::path(files[4]).filename() == "figure5_analytic.csv");
  for (int i = 0; i < 4; ++i) {
    const std::string csv = read_file(files[static_cast<std::size_t>(i)]);
    CHECK(csv.rfind("time,fidelity_mean,fidelity_stderr,n_jumps_mean\n", 0) == 0);
  }
  const std::string analytic = read_file(files[4]);
  CHECK(analytic.find("combined_c1sq") != std::string::npos);
  CHECK(analytic.find("combined_c3upper") != std::string::npos);
}

TEST_CASE("analytic-curves emits the long-format CSV") {
  TempDir dir("qstab_test_curves");
  ExperimentConfig cfg = experiments::parse_config_json(
      json{{"experiment", "analytic-curves"},
           {"output_dir", dir.path.string()},
           {"params", {{"points", 3}, {"t_max", 10.0}}}});
  const auto files = experiments::run(cfg);
  const std::string csv = read_file(files[0]);
  CHECK(csv.rfind("time,fidelity,model\n", 0) == 0);
  CHECK(csv.find(",no_decay") != std::string::npos);
  CHECK(csv.find(",jumpcode") != std::string::npos);
  CHECK(csv.find(",coherent") != std::string::npos);
  CHECK(csv.find(",combined") != std::string::npos);
  // all curves start at fidelity 1
  std::istringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    if (line.rfind("0,", 0) == 0) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("correlation-matrix experiment emits j,k,value") {
  TempDir dir("qstab_test_corr");
  ExperimentConfig cfg = experiments::parse_config_json(
      json{{"experiment", "correlation-matrix"},
           {"output_dir", dir.path.string()},
           {"params", {{"n_qubits", 2}}}});
  const auto files = experiments::run(cfg);
  const std::string csv = read_file(files[0]);
  CHECK(csv.rfind("j,k,value\n", 0) == 0);
  int lines = -1;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 16);  // 4 gates -> 16 entries
  CHECK(csv.find("1,1,1\n") != std::string::npos);  // normalized diagonal
}

TEST_CASE("constants-check experiment reports matching brute force") {
  TempDir dir("qstab_test_constants");
  ExperimentConfig cfg = experiments::parse_config_json(
      json{{"experiment", "constants-check"},
           {"output_dir", dir.path.string()},
           {"params", {{"n_physical", json::array({4})}, {"draws", 2}}}});
  const auto files = experiments::run(cfg);
  const std::string csv = read_file(files[0]);
  std::istringstream ss(csv);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    const auto last = line.rfind(',');
    CHECK(std::stod(line.substr(last + 1)) < 1e-12);
  }
}
