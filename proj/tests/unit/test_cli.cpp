#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "platoon/errors.hpp"
#include "platoon_cli/commands.hpp"

namespace platoon::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("platoon_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  Context ctx(const std::string& sub) const {
    Context c;
    c.out_dir = root_ / sub;
    c.workers = 2;
    return c;
  }

  static ScenarioConfig shipped(const char* name) {
    return load_scenario(fs::path(PLATOON_SCENARIO_DIR) / name);
  }

  int run_binary(const std::string& args) const {
    const std::string cmd = std::string(PLATOON_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path root_;
};

TEST_F(CliTest, HeadwayFromGilbertTriple) {
  run_command("headway", std::nullopt, json{{"tau", 0.5}, {"gilbert", {0.3, 0.1, 0.2}}, {"ka", 0.4}}, ctx("a"));
  const auto j = json::parse(slurp(root_ / "a" / "headway.json"));
  EXPECT_NEAR(j["gamma"].get<double>(), 0.4, 1e-15);
  EXPECT_NEAR(j["h_min_s"].get<double>(), 0.862, 5e-4);
}

TEST_F(CliTest, HeadwayLimits) {
  run_command("headway", std::nullopt, json{{"tau", 0.5}, {"gamma", 1.0}, {"ka", 0.4}}, ctx("a"));
  EXPECT_NEAR(json::parse(slurp(root_ / "a" / "headway.json"))["h_min_s"].get<double>(), 0.714, 5e-4);
  run_command("headway", std::nullopt, json{{"tau", 0.5}, {"gamma", 0.0}, {"ka", 0.4}}, ctx("b"));
  EXPECT_EQ(json::parse(slurp(root_ / "b" / "headway.json"))["h_min_s"].get<double>(), 1.0);
}

TEST_F(CliTest, HeadwayUndefinedStationary) {
  EXPECT_THROW(run_command("headway", std::nullopt, json{{"gilbert", {0.0, 0.0, 0.5}}}, ctx("a")), NumericalError);
}

TEST_F(CliTest, ZeroManeuverWritesZeroErrors) {
  auto sc = shipped("fig3.scn");
  sc.leader = {};
  run_command("simulate", sc, json::object(), ctx("z"));
  std::istringstream in(slurp(root_ / "z" / "spacing_errors.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time_s,e1_m,e2_m,e3_m,e4_m,e5_m");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    while (std::getline(cells, cell, ',')) ASSERT_EQ(std::stod(cell), 0.0) << line;
  }
  EXPECT_EQ(rows, static_cast<int>(sc.steps()) + 1);
}

TEST_F(CliTest, SummaryIsSingleLineJson) {
  run_command("simulate", shipped("fig2.scn"), json{{"seed", 9}}, ctx("s"));
  const auto text = slurp(root_ / "s" / "summary.json");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  const auto j = json::parse(text);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["peak_abs_spacing_error_m"].size(), 5u);
}

TEST_F(CliTest, ManifestHashMatchesResolvedConfig) {
  const auto m = run_command("stability", shipped("fig2.scn"), json::object(), ctx("m"));
  const auto back = read_manifest(root_ / "m" / "manifest.json");
  EXPECT_EQ(back.command, "stability");
  EXPECT_EQ(back.config_hash, config_hash(parse_scenario(back.resolved_config)));
  EXPECT_EQ(back.outputs, m.outputs);
  EXPECT_FALSE(back.toolkit_version.empty());
}

TEST_F(CliTest, ReplayReproducesEveryCommand) {
  auto small_mc = shipped("safety.scn");
  small_mc.duration_s = 8;
  const std::vector<std::tuple<std::string, std::optional<ScenarioConfig>, json>> runs{
      {"simulate", shipped("fig2.scn"), json{{"seed", 4}, {"realization", 2}}},
      {"headway", std::nullopt, json{{"tau", 0.5}, {"gamma", 0.4}}},
      {"stability", shipped("fig3.scn"), json::object()},
      {"bound", shipped("fig3.scn"), json{{"alpha_star", 0.5}}},
      {"montecarlo", small_mc, json{{"realizations", 30}, {"trajectories", true}}},
      {"validate-mean", shipped("fig3.scn"), json{{"realizations", 100}}},
      {"channel-log", shipped("fig2.scn"), json{{"slots", 5000}}},
  };
  int n = 0;
  for (const auto& [cmd, sc, opts] : runs) {
    const auto first = ctx("first" + std::to_string(n));
    const auto again = ctx("again" + std::to_string(n));
    ++n;
    const auto m = run_command(cmd, sc, opts, first);
    replay(first.out_dir / "manifest.json", again);
    ASSERT_FALSE(m.outputs.empty()) << cmd;
    for (const auto& out : m.outputs) {
      EXPECT_EQ(slurp(first.out_dir / out), slurp(again.out_dir / out)) << cmd << ": " << out;
    }
    EXPECT_EQ(slurp(first.out_dir / "manifest.json"), slurp(again.out_dir / "manifest.json")) << cmd;
  }
}

TEST_F(CliTest, MonteCarloWritesBothModes) {
  auto sc = shipped("safety.scn");
  sc.duration_s = 8;
  run_command("montecarlo", sc, json{{"realizations", 20}}, ctx("mc"));
  for (const char* f : {"safety_acc.json", "safety_cacc.json", "variance_acc.csv", "variance_cacc.csv", "summary.json"}) {
    EXPECT_TRUE(fs::exists(root_ / "mc" / f)) << f;
  }
  EXPECT_EQ(slurp(root_ / "mc" / "variance_acc.csv").substr(0, 41), "time_s,var_e1_m2,var_e2_m2,var_e3_m2,var_");
}

TEST_F(CliTest, MonteCarloPointMassDoesNotCollide) {
  auto sc = shipped("safety.scn");
  sc.decel = FixedDecel{9.0};
  run_command("montecarlo", sc, json{{"realizations", 1}}, ctx("pm"));
  const auto j = json::parse(slurp(root_ / "pm" / "summary.json"));
  EXPECT_EQ(j["modes"]["acc"]["collided"], 0);
  EXPECT_EQ(j["modes"]["cacc"]["collided"], 0);
  EXPECT_TRUE(j["modes"]["cacc"]["mean_events_per_unstable"].is_null());
}

TEST_F(CliTest, ExitCodes) {
  const auto scn = (fs::path(PLATOON_SCENARIO_DIR) / "fig3.scn").string();
  const auto out = (root_ / "x").string();
  EXPECT_EQ(run_binary("stability " + scn + " -o " + out), kExitOk);
  EXPECT_EQ(run_binary("frobnicate"), kExitUsage);
  EXPECT_EQ(run_binary("stability"), kExitUsage);

  const auto broken = root_ / "broken.scn";
  std::ofstream(broken) << "[platoon]\nfollowers = 2\n";
  EXPECT_EQ(run_binary("simulate " + broken.string() + " -o " + out), kExitConfig);
  EXPECT_EQ(run_binary("headway --gilbert 0 0 0.5 -o " + out), kExitNumerical);
  EXPECT_EQ(run_binary("simulate /no/such/file.scn -o " + out), kExitIo);

  const auto blocker = root_ / "file";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run_binary("simulate " + scn + " -o " + (blocker / "sub").string()), kExitIo);
}

TEST_F(CliTest, OutputDirFromEnvironment) {
  const auto scn = (fs::path(PLATOON_SCENARIO_DIR) / "fig3.scn").string();
  const auto env_dir = root_ / "from_env";
  EXPECT_EQ(run_binary("--version"), kExitOk);
  const std::string cmd = "PLATOON_OUT_DIR=" + env_dir.string() + " " + PLATOON_CLI_PATH + " stability " + scn +
                          " >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(env_dir / "stability.json"));
  EXPECT_TRUE(fs::exists(env_dir / "manifest.json"));
}

TEST_F(CliTest, InputScenarioUntouched) {
  const auto copy = root_ / "fig2.scn";
  fs::copy_file(fs::path(PLATOON_SCENARIO_DIR) / "fig2.scn", copy);
  const auto before = slurp(copy);
  const auto time_before = fs::last_write_time(copy);
  ASSERT_EQ(run_binary("simulate " + copy.string() + " -o " + (root_ / "o").string()), 0);
  ASSERT_EQ(run_binary("montecarlo " + copy.string() + " -n 3 -o " + (root_ / "o2").string()), 0);
  EXPECT_EQ(slurp(copy), before);
  EXPECT_EQ(fs::last_write_time(copy), time_before);
}

}  // namespace
}  // namespace platoon::cli
