#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qswitch/config.hpp"
#include "qswitch/error.hpp"
#include "qswitch/runner.hpp"

namespace fs = std::filesystem;
using namespace qswitch;

namespace {

fs::path scratch(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("qswitch_runner_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> split_numbers(const std::string& line) {
  std::vector<double> v;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
  return v;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QSWITCH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_spectrum() {
  auto c = parse_config("experiment = spectrum\ng_s = 5\ng_q = 20\ndelta_q = 2\n"
                        "spectrum_min = -10\nspectrum_max = 60\nspectrum_points = 141\n");
  c.name = "spec";
  return c;
}

}  // namespace

TEST(Runner, FormatNumber) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Runner, SpectrumCsvShape) {
  const auto dir = scratch("spectrum");
  const auto out = run(small_spectrum(), {dir, 1, false});
  const auto text = slurp(dir / "spec.csv");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto rows = lines(text);
  ASSERT_EQ(rows.size(), 142u);
  EXPECT_EQ(rows[0].rfind("Delta_q,E_1,E_2,E_3,E_4", 0), 0u) << rows[0];
  const auto first = split_numbers(rows[1]);
  EXPECT_DOUBLE_EQ(first[0], -10.0);
  // energies ascending
  for (int k = 1; k < 4; ++k) EXPECT_LE(first[k], first[k + 1]);
  EXPECT_TRUE(fs::exists(dir / "spec.meta.json"));
  EXPECT_FALSE(out.files.empty());
}

TEST(Runner, ByteIdenticalAcrossRuns) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  auto c = parse_config("experiment = scan\nscan_kind = leakage_map\ng_s = 5\ng_q = 20\ndelta_q = 2\n"
                        "kappa_wq = 5\nscan_Delta_q = -5, 10, 52\nscan_delta_q = 2\nscan_t_max = 2000\n");
  c.name = "map";
  run(c, {a, 1, false});
  run(c, {b, 3, false});
  EXPECT_EQ(slurp(a / "map.csv"), slurp(b / "map.csv"));
  const auto s = small_spectrum();
  run(s, {a, 1, false});
  run(s, {b, 1, false});
  EXPECT_EQ(slurp(a / "spec.csv"), slurp(b / "spec.csv"));
}

TEST(Runner, EvolveLedgerCloses) {
  const auto dir = scratch("evolve");
  auto c = load_config(std::string(QSWITCH_CONFIG_DIR) + "/evolve_lossless.cfg");
  run(c, {dir, 1, false});
  const auto rows = lines(slurp(dir / "evolve_lossless.csv"));
  ASSERT_GT(rows.size(), 2u);
  std::vector<std::string> header;
  {
    std::istringstream in(rows[0]);
    for (std::string cell; std::getline(in, cell, ',');) header.push_back(cell);
  }
  const auto last = split_numbers(rows.back());
  ASSERT_EQ(last.size(), header.size());
  double total = 0.0;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k].rfind("re_", 0) == 0 || header[k].rfind("im_", 0) == 0) total += last[k] * last[k];
    if (header[k] == "emitted" || header[k] == "dissipated") total += last[k];
  }
  EXPECT_NEAR(total, 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(last[0], 60.0);
}

TEST(Runner, ShapeJsonFields) {
  const auto dir = scratch("shape");
  auto c = parse_config("experiment = shape\ng_s = 5\ng_q = 20\ndelta_q = 2\nkappa_wq = 5\nsweep_T = 13\n");
  c.name = "shape";
  run(c, {dir, 1, false});
  const auto j = nlohmann::json::parse(slurp(dir / "shape.json"));
  for (const char* key : {"P_out", "xi", "gaussian", "J", "Delta_q_off", "Delta_q_res", "ledger", "T"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_GT(j["P_out"].get<double>(), 0.999);
  EXPECT_LT(j["xi"].get<double>(), 0.05);
  EXPECT_DOUBLE_EQ(j["T"].get<double>(), 13.0);
  EXPECT_TRUE(fs::exists(dir / "shape_sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "shape_output.csv"));
  EXPECT_FALSE(fs::exists(dir / "shape_reconstructed_sweep.csv"));
}

TEST(Runner, MismatchedSweepTable) {
  auto c = parse_config("experiment = evolve\ng_s = 5\ng_q = 20\nsweep_times = 0, 1\nsweep_values = 3\n");
  try {
    run(c, {scratch("mismatch"), 1, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    EXPECT_EQ(exit_code(e), 2);
  }
}

TEST(Runner, ExitCodeClasses) {
  EXPECT_EQ(exit_code(Error(ErrorCode::UnknownKey, "")), 2);
  EXPECT_EQ(exit_code(Error(ErrorCode::NegativeRate, "")), 2);
  EXPECT_EQ(exit_code(Error(ErrorCode::NoConvergence, "")), 3);
  EXPECT_EQ(exit_code(Error(ErrorCode::InsufficientDecay, "")), 3);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const auto bad = dir / "bad.cfg";
  std::ofstream(bad) << "experiment = spectrum\nwhatever = 1\n";
  EXPECT_EQ(cli("--config " + bad.string() + " --out " + dir.string()), 2);
  EXPECT_EQ(cli("--config " + (dir / "missing.cfg").string()), 2);
  EXPECT_EQ(cli("--bogus"), 2);
  EXPECT_EQ(cli(""), 2);
}

class ShippedConfig : public ::testing::TestWithParam<std::string> {};

TEST_P(ShippedConfig, RunsCleanly) {
  const auto dir = scratch("cfg_" + GetParam());
  const auto cfg = fs::path(QSWITCH_CONFIG_DIR) / (GetParam() + ".cfg");
  ASSERT_TRUE(fs::exists(cfg));
  EXPECT_EQ(cli("--config " + cfg.string() + " --out " + dir.string()), 0);
  bool any = false;
  for (const auto& e : fs::directory_iterator(dir)) any |= e.path().extension() == ".csv" || e.path().extension() == ".json";
  EXPECT_TRUE(any);
}

INSTANTIATE_TEST_SUITE_P(
    All, ShippedConfig,
    ::testing::Values("capture_mirrored", "decay_gamma_q", "decay_kappa_s", "dissipation_kappa_q",
                      "evolve_lossless", "leakage_map", "passive_emission", "physical_diamond_pbg",
                      "physical_slot_waveguide", "physical_stripline", "qudit_three_time",
                      "qudit_two_time", "shaped_emission", "spectrum_three_level",
                      "spectrum_two_level"));
