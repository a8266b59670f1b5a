// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <sys/wait.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace pilotcap;
using namespace pilotcap::cli;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pilotcap_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  auto path = dir / "config.json";
  std::ofstream(path) << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_in_process(const std::string& command, const fs::path& config, const fs::path& out_dir,
                       std::optional<Scheme> scheme = std::nullopt,
                       std::optional<std::uint64_t> seed = std::nullopt) {
  CommandOptions opts{command, config, scheme, out_dir, seed};
  std::ostringstream out, err;
  const int code = run_command(opts, out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(PILOTCAP_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("format_number") {
  CHECK(format_number(1.4142135623730951) == "1.41421356");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(123456789012.0) == "1.23456789e+11");
}

TEST_CASE("design writes a valid allocation") {
  auto dir = scratch("design");
  auto cfg = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3,"c":1})");
  auto r = run_in_process("design", cfg, dir);
  REQUIRE(r.code == kSuccess);
  const std::string doc = slurp(dir / "design.json");
  CHECK(doc.find("\"valid\": true") != std::string::npos);
  CHECK(doc.find("\"powers\": [\n    0.5,") != std::string::npos);
}

TEST_CASE("design exit codes") {
  auto dir = scratch("design_codes");
  auto infeasible = write_config(dir, R"({"schema_version":1,"gammas":[3,3,3,3,3,3],"tau":3})");
  CHECK(run_in_process("design", infeasible, dir).code == kInfeasible);
  auto bad_gamma = write_config(dir, R"({"schema_version":1,"gammas":[1,-1],"tau":3})");
  CHECK(run_in_process("design", bad_gamma, dir).code == kInputError);
  auto missing = write_config(dir, R"({"schema_version":1,"gammas":[1,1]})");
  auto m = run_in_process("design", missing, dir);
  CHECK(m.code == kInputError);
  CHECK(m.err.find("tau") != std::string::npos);
  auto version = write_config(dir, R"({"schema_version":2,"gammas":[1],"tau":1})");
  CHECK(run_in_process("design", version, dir).code == kInputError);
  auto broken = write_config(dir, "{\"schema_version\":1,\n\"gammas\":[1,}");
  auto b = run_in_process("design", broken, dir);
  CHECK(b.code == kInputError);
  CHECK(b.err.find(":2:") != std::string::npos);
  CHECK(run_in_process("design", dir / "absent.json", dir).code == kInputError);
}

TEST_CASE("dB targets") {
  auto dir = scratch("db");
  // 0 dB is gamma = 1
  auto cfg = write_config(dir, R"({"schema_version":1,"units":"dB","gammas":[0,0,0,0,0,0],"tau":3})");
  REQUIRE(run_in_process("design", cfg, dir).code == kSuccess);
  CHECK(slurp(dir / "design.json").find("\"targets\": [\n    1.0,") != std::string::npos);
  auto bad = write_config(dir, R"({"schema_version":1,"units":"neper","gammas":[0],"tau":3})");
  CHECK(run_in_process("design", bad, dir).code == kInputError);
}

TEST_CASE("check verdicts") {
  auto dir = scratch("check");
  auto six = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3})");
  CHECK(run_in_process("check", six, dir, Scheme::gwbe).out ==
        "ADMISSIBLE scheme=gwbe binding=load slack=0\n");
  CHECK(run_in_process("check", six, dir, Scheme::wbe).out.rfind("ADMISSIBLE scheme=wbe", 0) == 0);
  CHECK(run_in_process("check", six, dir, Scheme::fos).out.rfind("ADMISSIBLE scheme=fos", 0) == 0);

  auto seven = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1,1],"tau":3})");
  CHECK(run_in_process("check", seven, dir, Scheme::gwbe).out ==
        "NOT-ADMISSIBLE scheme=gwbe binding=user_bound slack=-0.519259302\n");

  // load above tau while the user bound still holds
  auto unknown = write_config(dir, R"({"schema_version":1,"gammas":[100,100,100,0.01],"tau":2})");
  CHECK(run_in_process("check", unknown, dir).out.rfind("UNKNOWN scheme=gwbe", 0) == 0);

  auto grouped = write_config(
      dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3,"grouping":[[0,1],[2,3],[4,5]]})");
  CHECK(run_in_process("check", grouped, dir, Scheme::fos).code == kSuccess);
  auto bad_group = write_config(
      dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3,"grouping":[[0,1,2],[3,4],[5]]})");
  CHECK(run_in_process("check", bad_group, dir, Scheme::fos).code == kInputError);
}

TEST_CASE("sweep-k csv") {
  auto dir = scratch("sweep_k");
  auto cfg = write_config(
      dir, R"({"schema_version":1,"tau":3,"k_min":6,"k_max":6,"head_weights":[1,1,1],"tail_weight":0.5})");
  REQUIRE(run_in_process("sweep-k", cfg, dir).code == kSuccess);
  CHECK(slurp(dir / "sweep_k.csv") ==
        "# schema_version=1 command=sweep-k\nK,gwbe,wbe,fos,fos_index_order\n"
        "6,1.41421356,1.22828569,1.41421356,1.41421356\n");
  CHECK(fs::exists(dir / "sweep_k.meta.json"));
}

TEST_CASE("sweep-tau csv") {
  auto dir = scratch("sweep_tau");
  auto cfg = write_config(dir, R"({"schema_version":1,"tau_min":3,"tau_max":4,"level_gammas":[0.3333333333333333,1,3]})");
  REQUIRE(run_in_process("sweep-tau", cfg, dir, Scheme::gwbe).code == kSuccess);
  CHECK(slurp(dir / "sweep_tau.csv") == "# schema_version=1 command=sweep-tau\ntau,gwbe\n3,6\n4,6\n");
}

TEST_CASE("region csv") {
  auto dir = scratch("region");
  auto cfg = write_config(dir, R"({"schema_version":1,"base_gammas":[0,0,0,1,1,1],"tau":3,
    "free_axes":[0,1,2],"grid":[{"values":[1]},{"values":[1]}],"cap":5,
    "grouping":[[0,3],[1,4],[2,5]]})");
  REQUIRE(run_in_process("region", cfg, dir).code == kSuccess);
  CHECK(slurp(dir / "region.csv") == "# schema_version=1 command=region\ngamma_1,gamma_2,gwbe,wbe,fos\n1,1,1,1,1\n");
  auto infeasible = write_config(dir, R"({"schema_version":1,"base_gammas":[0,0,0,99,99,99,99],"tau":3,
    "free_axes":[0,1,2],"grid":[{"values":[1]},{"values":[1]}]})");
  CHECK(run_in_process("region", infeasible, dir).code == kInfeasible);
}

TEST_CASE("simulate csv and seed override") {
  auto dir = scratch("simulate");
  auto cfg = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3,
    "m_values":[16,32],"n_trials":10,"seed":5})");
  REQUIRE(run_in_process("simulate", cfg, dir).code == kSuccess);
  const std::string a = slurp(dir / "simulate.csv");
  CHECK(a.rfind("# schema_version=1 command=simulate seed=5\nM,user,", 0) == 0);
  REQUIRE(run_in_process("simulate", cfg, dir, std::nullopt, 5).code == kSuccess);
  CHECK(slurp(dir / "simulate.csv") == a);
  REQUIRE(run_in_process("simulate", cfg, dir, std::nullopt, 6).code == kSuccess);
  CHECK(slurp(dir / "simulate.csv") != a);
  auto descending = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3,
    "m_values":[32,16],"n_trials":2})");
  CHECK(run_in_process("simulate", descending, dir).code == kInputError);
}

TEST_CASE("binary argument handling and exit codes") {
  auto dir = scratch("binary");
  auto ok = write_config(dir, R"({"schema_version":1,"gammas":[1,1,1,1,1,1],"tau":3})");
  const std::string out = " --out " + dir.string();
  CHECK(run_binary("design --config " + ok.string() + out) == 0);
  CHECK(run_binary("check --scheme wbe --config " + ok.string() + out) == 0);
  CHECK(run_binary("check --scheme cdma --config " + ok.string() + out) == 1);
  CHECK(run_binary("design" + out) == 1);
  CHECK(run_binary("frobnicate --config " + ok.string()) == 1);
  auto infeasible = write_config(dir, R"({"schema_version":1,"gammas":[3,3,3,3,3,3],"tau":3})");
  CHECK(run_binary("design --config " + infeasible.string() + out) == 2);
}
