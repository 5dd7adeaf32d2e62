// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sopot_fbmc/experiments.hpp"
#include "sopot_fbmc/io.hpp"

namespace fs = std::filesystem;
using namespace sopot;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sopot_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && '" SOPOT_FBMC_CLI "' " + args + " >out.txt 2>err.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

} // namespace

TEST_F(Cli, FilterWritesUnitEnergyPrototype) {
  ASSERT_EQ(run("filter --subcarriers 128 --overlap 4 -o g.csv"), 0);
  std::istringstream in(slurp("g.csv"));
  const auto g = io::read_filter(in);
  EXPECT_EQ(g.length(), 512u);
  EXPECT_NEAR(g.energy(), 1.0, 1e-12);
  EXPECT_TRUE(fs::exists(dir_ / "g.csv.manifest"));
}

TEST_F(Cli, ApproxUsesTheExactBudget) {
  ASSERT_EQ(run("filter -o g.csv"), 0);
  ASSERT_EQ(run("approx --method sdl --spt-per-coeff 1.8 --bmax 12 -i g.csv -o ghat.csv --trace trace.csv"), 0);
  std::istringstream t(slurp("trace.csv"));
  const auto trace = io::read_trace(t);
  EXPECT_EQ(spt_count(trace), 922u);
  EXPECT_EQ(trace.depth_limit(), 12);

  std::istringstream f(slurp("ghat.csv"));
  const auto ghat = io::read_filter(f);
  const auto values = reconstruct(trace);
  for (std::size_t i = 0; i < values.size(); ++i) EXPECT_EQ(values[i], ghat[i]);
}

TEST_F(Cli, BerIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("ber --order 4 --ebn0 0:2:12 --seed 7"), 0);
  const auto first = slurp("ber.csv");
  ASSERT_EQ(run("ber --order 4 --ebn0 0:2:12 --seed 7"), 0);
  EXPECT_EQ(slurp("ber.csv"), first);
  std::istringstream in(first);
  EXPECT_EQ(sim::read_ber_csv(in).size(), 3u);
}

TEST_F(Cli, ManifestReproducesTheRun) {
  ASSERT_EQ(run("ber --filters ref,mpgbp:2 --ebn0 2,5 --blocks 16 --seed 3 -o a/ber.csv"), 0);
  const auto first = slurp("a/ber.csv");
  fs::rename(dir_ / "a/ber.csv.manifest", dir_ / "m.txt");
  fs::remove(dir_ / "a/ber.csv");
  ASSERT_EQ(run("ber --config m.txt"), 0);
  EXPECT_EQ(slurp("a/ber.csv"), first);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  write("cfg.txt", "# settings\nsubcarriers = 32\nmethods=sdl\ngrid = \"1.5,2\"\noutput=s.csv\n");
  ASSERT_EQ(run("sweep-mse --config cfg.txt --grid 3"), 0);
  std::istringstream in(slurp("s.csv"));
  const auto rows = sim::read_sweep_csv(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "SDL");
  EXPECT_EQ(rows[0].wordlength_or_budget, 384u); // 3 * 128
}

TEST_F(Cli, UnknownConfigKeyIsAUsageError) {
  write("cfg.txt", "colour=blue\n");
  EXPECT_EQ(run("filter --config cfg.txt"), 2);
}

TEST_F(Cli, SweepInterferenceAndPsdOutputsRoundTrip) {
  ASSERT_EQ(run("sweep-interference --subcarriers 32 --bits 4,6 --grid matched"), 0);
  std::istringstream s(slurp("sweep.csv"));
  const auto rows = sim::read_sweep_csv(s);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].method, "reference");

  ASSERT_EQ(run("psd --subcarriers 64 --active 32 --frames 4 --segment 256 --filters ref,csd:5"), 0);
  std::istringstream p(slurp("psd.csv"));
  const auto curves = sim::read_psd_csv(p);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[1].label, "csd:5");
  EXPECT_EQ(curves[0].psd.frequencies.size(), 256u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("approx --no-such-flag"), 2);
  EXPECT_EQ(run("filter --subcarriers many"), 2);
  EXPECT_EQ(run("ber --quantize sideways"), 2);
  EXPECT_EQ(run("filter --subcarriers 7"), 1);
  EXPECT_EQ(run("filter --overlap 3"), 1);
  EXPECT_EQ(run("approx -i missing.csv"), 1);
  EXPECT_EQ(run("approx --method nope -i missing.csv"), 1);
  EXPECT_EQ(run("--help"), 0);
}
