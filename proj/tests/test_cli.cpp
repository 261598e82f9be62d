#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ntknas_cli_" + name);
  fs::remove_all(p);
  return p;
}

CliResult cli(const std::string& args) {
  static int calls = 0;
  const fs::path log = fs::temp_directory_path() /
                       ("ntknas_cli_" + std::to_string(::getpid()) + "_" + std::to_string(calls++) + ".log");
  const std::string cmd = std::string(NTKNAS_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Cli, KernelSmokeAndDeterminism) {
  const fs::path a = scratch("kernel_a");
  const fs::path b = scratch("kernel_b");
  ASSERT_EQ(cli("kernel --act relu,relu --skips 0 --n 8 --d 4 --seed 1 --out " + a.string()).code, 0);
  ASSERT_EQ(cli("kernel --act relu,relu --skips 0 --n 8 --d 4 --seed 1 --out " + b.string()).code, 0);
  const std::string csv = slurp(a / "kernel.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), ','), 8 * 7);
  EXPECT_EQ(csv, slurp(b / "kernel.csv"));
  const auto j = read_json(a / "kernel.json");
  EXPECT_GE(j["lambda_min"].get<double>(), 0.0);
  const auto m = read_json(a / "manifest.json");
  EXPECT_EQ(m["subcommand"], "kernel");
  EXPECT_TRUE(m.contains("version"));
  EXPECT_EQ(m["config"]["seed"], 1);
}

TEST(Cli, LengthMismatchExitsWithInputError) {
  const CliResult r = cli("kernel --act relu --depth 4 --out " + scratch("mismatch").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("expected 3 activations"), std::string::npos) << r.output;
  EXPECT_EQ(cli("kernel --act gelu --out " + scratch("gelu").string()).code, 2);
  EXPECT_EQ(cli("kernel --no-such-flag").code, 2);
}

TEST(Cli, NonUnitCsvRowsAreRenormalized) {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "data.csv");
    out << "3,4,1\n1,0,0\n0,2,1\n";
  }
  ASSERT_EQ(cli("kernel --act tanh --data " + (dir / "data.csv").string() + " --out " + (dir / "o").string()).code, 0);
  const auto j = read_json(dir / "o" / "kernel.json");
  EXPECT_EQ(j["N"], 3);
  EXPECT_FALSE(j["notes"].empty());
}

TEST(Cli, ReplayReproducesOutputs) {
  const fs::path a = scratch("replay_a");
  const fs::path b = scratch("replay_b");
  ASSERT_EQ(cli("kernel --act tanh,swish --skips 1 --n 6 --d 3 --seed 4 --out " + a.string()).code, 0);
  ASSERT_EQ(cli("replay --manifest " + (a / "manifest.json").string() + " --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "kernel.csv"), slurp(b / "kernel.csv"));
}

TEST(Cli, OutputDirFromEnvironment) {
  const fs::path dir = scratch("env");
  const std::string cmd = "NTKNAS_OUTPUT_DIR=" + dir.string() + " " + NTKNAS_CLI_PATH +
                          " bounds --act relu,relu --n 100 --d 10 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "bounds.json"));
}

TEST(Cli, Bounds) {
  const fs::path a = scratch("bounds");
  ASSERT_EQ(cli("bounds --act relu,relu --n 100 --d 10 --out " + a.string()).code, 0);
  const auto j = read_json(a / "bounds.json");
  EXPECT_DOUBLE_EQ(j["upper_thm1"].get<double>(), 30.0);
  EXPECT_TRUE(j["vacuous"].get<bool>());
  EXPECT_NEAR(j["C2"].get<double>(), 16 * std::sqrt(3.0), 1e-12);
}

TEST(Cli, SearchSmoke) {
  const fs::path a = scratch("search_a");
  const fs::path b = scratch("search_b");
  const std::string args = "search --M 10 --k 3 --m 16 --n 96 --n-val 48 --budget 1 --seed 2 --out ";
  ASSERT_EQ(cli(args + a.string()).code, 0);
  ASSERT_EQ(cli(args + b.string()).code, 0);
  const auto j = read_json(a / "search.json");
  ASSERT_EQ(j["ranked"].size(), 10u);
  int with_val = 0;
  for (const auto& c : j["ranked"]) with_val += !c["val_accuracy"].is_null();
  EXPECT_EQ(with_val, 3);
  EXPECT_EQ(slurp(a / "candidates.csv"), slurp(b / "candidates.csv"));
  const fs::path f = scratch("search_frob");
  ASSERT_EQ(cli(args + f.string() + " --mode frobenius").code, 0);
  EXPECT_EQ(read_json(f / "search.json")["best"]["score_mode"], "frobenius_empirical");
}

TEST(Cli, ConvergenceRecordsConvention) {
  const fs::path a = scratch("conv");
  ASSERT_EQ(cli("convergence --widths 32,128 --seeds 2 --n 6 --d 3 --out " + a.string()).code, 0);
  const auto m = read_json(a / "manifest.json");
  EXPECT_EQ(m["details"]["convention"], "kernel_matched");
  const std::string csv = slurp(a / "convergence.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Cli, TrainModes) {
  const fs::path a = scratch("train_a1");
  ASSERT_EQ(cli("train --act relu,relu --m 16 --n 40 --d 4 --mode algorithm1 --out " + a.string()).code, 0);
  const auto j = read_json(a / "train.json");
  EXPECT_TRUE(j.contains("returned_iterate"));
  EXPECT_TRUE(fs::exists(a / "params.bin"));
  const std::string loss = slurp(a / "loss.csv");
  EXPECT_EQ(std::count(loss.begin(), loss.end(), '\n'), 41);

  const fs::path k = scratch("train_kappa");
  ASSERT_EQ(cli("train --act relu,relu --m 16 --n 40 --d 4 --kappa 0.1 --out " + k.string()).code, 0);
  const auto jk = read_json(k / "train.json");
  EXPECT_EQ(jk["gamma_source"], "step_size_thm3");
  EXPECT_GT(jk["gamma"].get<double>(), 0.0);

  const CliResult div = cli("train --act relu,relu --m 16 --n 40 --d 4 --gamma 1e5 --divergence-limit 100 --out " +
                            scratch("train_div").string());
  EXPECT_EQ(div.code, 4);
  EXPECT_NE(div.output.find("iteration"), std::string::npos);
}

TEST(Cli, SweepRangeValidated) {
  EXPECT_EQ(cli("sweep --l-min 2 --out " + scratch("sweep_bad").string()).code, 2);
  const fs::path a = scratch("sweep");
  ASSERT_EQ(cli("sweep --kinds relu --configs all,none --l-min 3 --l-max 5 --n 8 --d 4 --out " + a.string()).code, 0);
  const std::string csv = slurp(a / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * 3);
}
