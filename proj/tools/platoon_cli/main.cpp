#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "platoon/errors.hpp"
#include "platoon/version.hpp"
#include "platoon_cli/commands.hpp"

namespace {

using nlohmann::json;
using platoon::cli::ExitCode;

struct Common {
  std::string out;
  unsigned workers = 0;
  std::string scenario;
};

void add_common(CLI::App* sub, Common& c, bool with_scenario) {
  if (with_scenario) sub->add_option("scenario", c.scenario, "Scenario file")->required();
  sub->add_option("-o,--out", c.out, "Output directory (default: $PLATOON_OUT_DIR or ./platoon-out)");
  sub->add_option("-j,--workers", c.workers, "Worker threads, 0 = all cores");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Platoon string-stability and safety toolkit"};
  app.set_version_flag("--version", std::string(platoon::kVersion));
  app.require_subcommand(1);

  Common common;
  json options = json::object();
  std::string command;

  std::optional<std::uint64_t> seed, realizations, realization, slots, pair;
  std::optional<double> gamma, tau, ka, alpha_star;
  std::vector<double> gilbert;
  std::string mode = "both";
  bool trajectories = false, as_json = false;
  std::string manifest_path;

  auto* sim = app.add_subcommand("simulate", "Run one realization and write spacing errors and trajectories");
  add_common(sim, common, true);
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_option("--realization", realization, "Realization index (default 0)");

  auto* hw = app.add_subcommand("headway", "Minimum string-stable time headway");
  add_common(hw, common, false);
  hw->add_option("--tau", tau, "Actuator lag [s] (default 0.5)");
  hw->add_option("--ka", ka, "Feed-forward gain (default 0.4)");
  auto* g_opt = hw->add_option("--gamma", gamma, "Packet reception probability");
  auto* gil_opt = hw->add_option("--gilbert", gilbert, "Gilbert channel P Q q")->expected(3);
  g_opt->excludes(gil_opt);
  hw->add_flag("--json", as_json, "Print the result as JSON");

  auto* stab = app.add_subcommand("stability", "Frequency-domain string-stability check");
  add_common(stab, common, true);

  auto* bnd = app.add_subcommand("bound", "Worst-case spacing-error bound vs. simulation");
  add_common(bnd, common, true);
  bnd->add_option("--alpha-star", alpha_star, "Initial-condition budget (default 0)");

  auto* mc = app.add_subcommand("montecarlo", "Emergency-braking collision study");
  add_common(mc, common, true);
  mc->add_option("--seed", seed, "Override the scenario seed");
  mc->add_option("-n,--realizations", realizations, "Override the realization count");
  mc->add_option("--mode", mode, "acc, cacc or both")->check(CLI::IsMember({"acc", "cacc", "both"}));
  mc->add_flag("--trajectories", trajectories, "Also write per-realization spacing errors");

  auto* vm = app.add_subcommand("validate-mean", "Compare the ensemble mean with the deterministic equivalent");
  add_common(vm, common, true);
  vm->add_option("--seed", seed, "Override the scenario seed");
  vm->add_option("-n,--realizations", realizations, "Ensemble size (default 1000, minimum 100)");

  auto* cl = app.add_subcommand("channel-log", "Record a reception log from the scenario channel");
  add_common(cl, common, true);
  cl->add_option("--seed", seed, "Override the scenario seed");
  cl->add_option("--slots", slots, "Number of slots (default 100000)");
  cl->add_option("--pair", pair, "Link index (default 1)");

  auto* rp = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  rp->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  rp->add_option("-o,--out", common.out, "Output directory");
  rp->add_option("-j,--workers", common.workers, "Worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? platoon::cli::kExitOk : platoon::cli::kExitUsage;
  }

  auto put = [&](const char* key, const auto& value) {
    if (value) options[key] = *value;
  };
  put("seed", seed);
  put("realization", realization);
  put("realizations", realizations);
  put("slots", slots);
  put("pair", pair);
  put("gamma", gamma);
  put("tau", tau);
  put("ka", ka);
  put("alpha_star", alpha_star);
  if (!gilbert.empty()) options["gilbert"] = gilbert;
  if (*mc) {
    options["mode"] = mode;
    options["trajectories"] = trajectories;
  }
  if (*hw) options["json"] = as_json;

  platoon::cli::Context ctx;
  ctx.out_dir = common.out.empty() ? platoon::cli::default_out_dir() : std::filesystem::path(common.out);
  ctx.out = &std::cout;
  ctx.workers = common.workers;

  try {
    if (*rp) {
      platoon::cli::replay(manifest_path, ctx);
      return platoon::cli::kExitOk;
    }
    command = app.get_subcommands().front()->get_name();
    std::optional<platoon::ScenarioConfig> scenario;
    if (!common.scenario.empty()) scenario = platoon::load_scenario(common.scenario);
    platoon::cli::run_command(command, scenario, options, ctx);
    return platoon::cli::kExitOk;
  } catch (const platoon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return platoon::cli::kExitConfig;
  } catch (const platoon::InvalidInputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return platoon::cli::kExitConfig;
  } catch (const platoon::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return platoon::cli::kExitNumerical;
  } catch (const platoon::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return platoon::cli::kExitIo;
  }
}
