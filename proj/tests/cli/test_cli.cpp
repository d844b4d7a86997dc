#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

// Run the CLI through the shell; returns the exit status and captured stdout.
std::pair<int, std::string> run(const std::string& args) {
  const auto out = std::filesystem::temp_directory_path() / "pvobs_cli_stdout.txt";
  const std::string cmd = std::string(PVOBS_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

const std::string kScenarios = PVOBS_SCENARIO_DIR;

TEST(Cli, SimulatePaperExample) {
  const auto dir = fresh_dir("pvobs_cli_sim");
  const auto [code, out] = run("simulate " + kScenarios + "/paper_example.json --out-dir " + dir.string());
  EXPECT_EQ(code, 0);
  EXPECT_NE(out.find("max inter-vehicle distance"), std::string::npos);
  for (const char* f : {"truth.csv", "estimate.csv", "trajectories.csv", "error_trace.csv", "distances.csv",
                        "segments.csv", "summary.json", "truth.svg", "estimate.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::filesystem::remove_all(dir);
}

TEST(Cli, SimulateOverridesAndErrors) {
  const auto dir = fresh_dir("pvobs_cli_override");
  EXPECT_EQ(run("simulate " + kScenarios + "/paper_example.json --cells 150 --horizon 0.05 --out-dir " +
                dir.string()).first,
            0);
  std::ifstream in(dir / "truth.csv");
  std::string header, first;
  std::getline(in, header);
  std::size_t rows = 0;
  while (std::getline(in, first) && first.rfind("0,", 0) == 0) ++rows;
  EXPECT_EQ(rows, 150u);
  EXPECT_EQ(run("simulate /nonexistent.json").first, 1);
  EXPECT_EQ(run("simulate " + kScenarios + "/paper_example.json --horizon -1").first, 1);
  EXPECT_EQ(run("simulate").first, 1);
  EXPECT_EQ(run("bogus").first, 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, CertifyExitCodes) {
  const auto dir = fresh_dir("pvobs_cli_cert");
  const auto ok = run("certify --vf 70 --gamma 3 --rho-min 0.55 --rho-max 0.65 --dm 1 --out-dir " + dir.string());
  EXPECT_EQ(ok.first, 0);
  EXPECT_NE(ok.second.find("feasible: yes"), std::string::npos);
  EXPECT_NE(ok.second.find("beta="), std::string::npos);
  EXPECT_NE(ok.second.find("t_star="), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "certificate.json"));
  const auto no = run("certify --vf 70 --gamma 3 --rho-min 0.1 --rho-max 0.9 --dm 10");
  EXPECT_EQ(no.first, 2);
  EXPECT_NE(no.second.find("feasible: no"), std::string::npos);
  EXPECT_EQ(run("certify --vf 70 --gamma 3 --rho-min 0 --rho-max 0.9 --dm 1").first, 1);
  EXPECT_EQ(run("certify --vf 70 --gamma 3 --rho-min 0.2").first, 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, FeasibilityMapCountsAndDeterminism) {
  const auto a = fresh_dir("pvobs_cli_map_a");
  const auto b = fresh_dir("pvobs_cli_map_b");
  const auto first = run("feasibility-map --vf 70 --gamma 3 --n 5 --out-dir " + a.string());
  EXPECT_EQ(first.first, 0);
  EXPECT_EQ(run("feasibility-map --vf 70 --gamma 3 --n 5 --out-dir " + b.string()).first, 0);
  const auto csv = slurp(a / "feasibility_map.csv");
  EXPECT_EQ(csv.rfind("rho_min,rho_max,d_M_max\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
  EXPECT_EQ(csv, slurp(b / "feasibility_map.csv"));
  EXPECT_TRUE(std::filesystem::exists(a / "feasibility_map.svg"));
  EXPECT_EQ(run("feasibility-map --vf 70 --gamma 3 --n 4").first, 1);
  EXPECT_EQ(run("feasibility-map --vf 70 --gamma 0 --n 5").first, 1);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

}  // namespace
