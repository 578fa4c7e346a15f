#include "support.hpp"

#include "fsislip/cli.hpp"

#include <filesystem>
#include <fstream>

using namespace fsislip;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch_dir(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("fsislip_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text)
{
  const auto path = (dir / "run.ini").string();
  std::ofstream(path) << text;
  return path;
}

std::string scenario(const std::string& name)
{
  return (fs::path(FSISLIP_SCENARIO_DIR) / (name + ".ini")).string();
}

const char* kApproach = R"([geometry]
center_y = -1.395
n_radial = 8
n_angular = 32
[physics]
gravity_y = -20
[initial]
eta0_y = -0.4
[time]
t_end = 1.0
dt = 5e-4
[output]
snapshot_stride = 100
)";

} // namespace

TEST(Cli, ValidateGoodConfig)
{
  const auto r = cli({"validate-config", "--config", scenario("falling")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("config OK"), std::string::npos);
  EXPECT_NE(r.out.find("defaults applied:"), std::string::npos);
}

TEST(Cli, ValidateBadConfig)
{
  const auto dir = scratch_dir("bad");
  const auto r = cli({"validate-config", "--config", write_config(dir, "[time]\nt_end = 1\ndt = 0.1\n[physics]\nmu = -1\n")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 5: mu: must be positive"), std::string::npos) << r.err;
}

TEST(Cli, MissingConfigFile)
{
  const auto r = cli({"validate-config", "--config", "/nonexistent/x.ini"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("/nonexistent/x.ini"), std::string::npos);
}

TEST(Cli, UnknownSubcommandAndMissingArguments)
{
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"simulate"}).code, 1);
  EXPECT_EQ(cli({"manufactured", "--levels", "0"}).code, 1);
}

TEST(Cli, HelpExitsCleanly)
{
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("check-operators"), std::string::npos);
}

TEST(Cli, CheckOperators)
{
  const auto r = cli({"check-operators", "--seed", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("operator checks passed"), std::string::npos);
}

TEST(Cli, ManufacturedTable)
{
  const auto r = cli({"manufactured", "--levels", "3"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line, last;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    last = line;
  }
  EXPECT_EQ(lines, 4u);
  const double order = std::stod(last.substr(last.find_last_of(' ') + 1));
  EXPECT_GE(order, 1.8);
}

TEST(Cli, SimulateStopsAtContact)
{
  const auto dir = scratch_dir("contact");
  const auto out_dir = (dir / "out").string();
  const auto r = cli({"simulate", "--config", write_config(dir, kApproach), "--out", out_dir});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stop reason: contact-threshold"), std::string::npos) << r.out;
  const auto rows = read_trajectory((fs::path(out_dir) / "trajectory.csv").string());
  ASSERT_GT(rows.size(), 100u);
  EXPECT_LE(rows.back().gap, 0.05 + 1e-3);
  EXPECT_TRUE(fs::exists(fs::path(out_dir) / "snap_000000.vtk"));
  EXPECT_TRUE(fs::exists(fs::path(out_dir) / "snap_000100.vtk"));
}

TEST(Cli, SimulateThreadsOverrideKeepsOutput)
{
  const auto dir = scratch_dir("threads");
  const auto cfg = write_config(dir, "[geometry]\nn_radial = 8\nn_angular = 32\n[physics]\ngravity_y = -1\n"
                                     "[initial]\nomega0 = 1\n[time]\nt_end = 0.01\ndt = 1e-3\n");
  ASSERT_EQ(cli({"simulate", "--config", cfg, "--out", (dir / "a").string()}).code, 0);
  ASSERT_EQ(cli({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--threads", "4"}).code, 0);
  std::ifstream a(dir / "a" / "trajectory.csv"), b(dir / "b" / "trajectory.csv");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
}

TEST(Cli, PicardNonconvergenceIsRuntimeFailure)
{
  const auto dir = scratch_dir("nonconv");
  const auto r = cli({"simulate", "--config", scenario("nonconvergence"), "--out", (dir / "out").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Picard iteration did not converge"), std::string::npos) << r.err;
}
