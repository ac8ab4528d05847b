#include "platoon_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "platoon/channel.hpp"
#include "platoon/csv.hpp"
#include "platoon/errors.hpp"
#include "platoon/montecarlo.hpp"
#include "platoon/stability.hpp"
#include "platoon/version.hpp"

namespace platoon::cli {
namespace {

using nlohmann::json;

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec || !std::filesystem::is_directory(root_)) {
      throw IoError("cannot create output directory '" + root_.string() + "'");
    }
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = root_ / name;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
    written_.push_back(name);
  }

  const std::vector<std::string>& written() const { return written_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

template <class T>
T option(const json& options, const char* key, T fallback) {
  if (!options.contains(key) || options.at(key).is_null()) return fallback;
  try {
    return options.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("options.") + key, e.what());
  }
}

const ScenarioConfig& need(const std::optional<ScenarioConfig>& scenario, const std::string& command) {
  if (!scenario) throw ConfigError("scenario", "command '" + command + "' needs a scenario file");
  return *scenario;
}

double peak_abs(const std::vector<double>& series) {
  double m = 0.0;
  for (double v : series) m = std::max(m, std::abs(v));
  return m;
}

std::string spacing_csv(const RealizationResult& r) {
  std::ostringstream os;
  os << "time_s";
  for (std::size_t i = 1; i <= r.spacing_errors.size(); ++i) os << ",e" << i << "_m";
  os << '\n';
  const std::size_t rows = r.spacing_errors.empty() ? 0 : r.spacing_errors.front().size();
  for (std::size_t k = 0; k < rows; ++k) {
    os << format_fixed(static_cast<double>(k) * r.dt, 6);
    for (const auto& series : r.spacing_errors) os << ',' << format_fixed(series[k]);
    os << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const RealizationResult& r) {
  std::ostringstream os;
  os << "time_s";
  const std::size_t n = r.states.empty() ? 0 : r.states.front().size();
  for (std::size_t i = 0; i < n; ++i) os << ",x" << i << "_m,v" << i << "_mps,a" << i << "_mps2";
  os << '\n';
  for (std::size_t k = 0; k < r.states.size(); ++k) {
    os << format_fixed(static_cast<double>(k) * r.dt, 6);
    for (const auto& s : r.states[k]) {
      os << ',' << format_fixed(s.x) << ',' << format_fixed(s.v) << ',' << format_fixed(s.a);
    }
    os << '\n';
  }
  return os.str();
}

json collisions_json(const RealizationResult& r) {
  json arr = json::array();
  for (const auto& c : r.collisions) arr.push_back({{"time_s", c.time_s}, {"front", c.front}, {"rear", c.rear}});
  return arr;
}

RunManifest finish(const std::string& command, const std::optional<ScenarioConfig>& scenario,
                   const json& options, OutputDir& out) {
  RunManifest m;
  m.command = command;
  m.toolkit_version = kVersion;
  m.options = options;
  if (scenario) {
    m.base_seed = scenario->seed;
    m.config_hash = config_hash(*scenario);
    m.resolved_config = serialize_scenario(*scenario);
  }
  m.outputs = out.written();
  write_manifest(out.root() / "manifest.json", m);
  return m;
}

void say(const Context& ctx, const std::string& text) {
  if (ctx.out != nullptr) *ctx.out << text;
}

// --- simulate ------------------------------------------------------------

RunManifest simulate(ScenarioConfig sc, const json& options, const Context& ctx) {
  sc.seed = option<std::uint64_t>(options, "seed", sc.seed);
  const auto index = option<std::uint64_t>(options, "realization", 0);
  json resolved = {{"seed", sc.seed}, {"realization", index}};

  const RealizationResult r = run_realization(sc, index, RunOptions{true});
  OutputDir out(ctx.out_dir);
  out.write("spacing_errors.csv", spacing_csv(r));
  out.write("trajectories.csv", trajectory_csv(r));

  json peaks = json::array();
  for (const auto& series : r.spacing_errors) peaks.push_back(peak_abs(series));
  const json summary = {
      {"command", "simulate"},     {"scenario", sc.name},
      {"seed", sc.seed},           {"realization", index},
      {"gamma", mean_reception(sc.channel)},
      {"peak_abs_spacing_error_m", peaks},
      {"collisions", collisions_json(r)},
      {"config_hash", config_hash(sc)},
  };
  out.write("summary.json", summary.dump() + "\n");

  std::ostringstream os;
  os << "scenario " << sc.name << ", realization " << index << ", seed " << sc.seed << "\n";
  for (std::size_t i = 0; i < r.spacing_errors.size(); ++i) {
    os << "  follower " << (i + 1) << " peak |spacing error| = " << format_fixed(peaks[i].get<double>(), 4)
       << " m\n";
  }
  os << "  collisions: " << r.collisions.size() << "\n";
  say(ctx, os.str());
  return finish("simulate", sc, resolved, out);
}

// --- headway -------------------------------------------------------------

RunManifest headway(const json& options, const Context& ctx) {
  const double tau = option<double>(options, "tau", 0.5);
  const double ka = option<double>(options, "ka", 0.4);
  const bool as_json = option<bool>(options, "json", false);
  double gamma = 0.0;
  json source;
  if (options.contains("gilbert") && !options.at("gilbert").is_null()) {
    const auto triple = option<std::vector<double>>(options, "gilbert", {});
    if (triple.size() != 3) throw ConfigError("options.gilbert", "expected three values P Q q");
    try {
      gamma = gamma_analytic(GilbertParams{triple[0], triple[1], triple[2]});
    } catch (const InvalidInputError& e) {
      throw ConfigError("options.gilbert", e.what());
    }
    source = {{"gilbert", triple}};
  } else if (options.contains("gamma") && !options.at("gamma").is_null()) {
    gamma = option<double>(options, "gamma", 1.0);
    source = {{"gamma", gamma}};
  } else {
    throw ConfigError("options.gamma", "give either a reception probability or a Gilbert triple");
  }
  double h_min = 0.0;
  try {
    h_min = min_headway(tau, gamma, ka);
  } catch (const InvalidInputError& e) {
    throw ConfigError("options", e.what());
  }

  const json record = {{"tau_s", tau}, {"ka", ka}, {"gamma", gamma}, {"h_min_s", h_min}, {"source", source}};
  OutputDir out(ctx.out_dir);
  out.write("headway.json", record.dump() + "\n");
  if (as_json) {
    say(ctx, record.dump() + "\n");
  } else {
    say(ctx, "gamma = " + format_fixed(gamma, 4) + "\nh_min = " + format_fixed(h_min, 4) + " s\n");
  }
  json resolved = options;
  return finish("headway", std::nullopt, resolved, out);
}

// --- stability -----------------------------------------------------------

RunManifest stability(const ScenarioConfig& sc, const json& options, const Context& ctx) {
  const double gamma = mean_reception(sc.channel);
  const double tau = sc.vehicle.tau;
  const ControllerConfig& cfg = sc.controller;
  const StabilityReport rep = is_string_stable(cfg, tau, gamma);
  const TransferFunction tf = cacc_error_tf(cfg, tau, gamma);

  OutputDir out(ctx.out_dir);
  std::ostringstream csv;
  write_frequency_response_csv(csv, tf);
  out.write("frequency_response.csv", csv.str());
  const json record = {
      {"scenario", sc.name}, {"gamma", gamma},         {"tau_s", tau},
      {"hw_s", cfg.h_w},     {"hinf", rep.hinf},       {"peak_omega_rad_s", rep.peak_omega},
      {"h_min_s", rep.h_min}, {"margin", rep.margin},  {"string_stable", rep.stable},
  };
  out.write("stability.json", record.dump() + "\n");

  std::ostringstream os;
  os << "||H||inf = " << format_fixed(rep.hinf, 6) << " at omega = " << format_fixed(rep.peak_omega, 4)
     << " rad/s\n"
     << "h_min    = " << format_fixed(rep.h_min, 4) << " s (h_w = " << format_fixed(cfg.h_w, 4) << " s)\n"
     << "margin   = " << format_fixed(rep.margin, 6) << "\n"
     << "string stable: " << (rep.stable ? "yes" : "no") << "\n";
  say(ctx, os.str());
  return finish("stability", sc, options, out);
}

// --- bound ---------------------------------------------------------------

json bound_json(const BoundReport& b) {
  return {{"variant", b.variant == JStarVariant::kTrace ? "trace" : "sqrt_trace"},
          {"j_star", b.j_star},
          {"beta2", b.beta2},
          {"gamma2", b.gamma2},
          {"eta", b.eta},
          {"alpha_star", b.alpha_star},
          {"w0_l2", b.w0_l2},
          {"m1", b.m1()},
          {"m2", b.m2()},
          {"bound_m", b.bound}};
}

RunManifest bound(const ScenarioConfig& sc, const json& options, const Context& ctx) {
  const double alpha_star = option<double>(options, "alpha_star", 0.0);
  if (!(alpha_star >= 0.0)) throw ConfigError("options.alpha_star", "must be >= 0");
  const double gamma = mean_reception(sc.channel);
  const ErrorSystem sys = cacc_error_system(sc.controller, sc.vehicle.tau, gamma);

  ScenarioConfig det = sc;
  det.channel = deterministic_equivalent(sc.channel);
  const RealizationResult r = run_realization(det, 0, RunOptions{true});
  std::vector<double> w0;
  w0.reserve(r.states.size());
  for (const auto& row : r.states) w0.push_back(row.front().a);
  double simulated = 0.0;
  for (const auto& series : r.spacing_errors) simulated = std::max(simulated, peak_abs(series));

  const BoundReport trace = theorem1_bound(sys, alpha_star, w0, sc.dt_s, JStarVariant::kTrace);
  const BoundReport root = theorem1_bound(sys, alpha_star, w0, sc.dt_s, JStarVariant::kSqrtTrace);

  OutputDir out(ctx.out_dir);
  const json record = {
      {"scenario", sc.name},
      {"gamma", gamma},
      {"simulated_max_abs_spacing_error_m", simulated},
      {"reports", json::array({bound_json(trace), bound_json(root)})},
      {"dominates", {{"trace", trace.bound >= simulated}, {"sqrt_trace", root.bound >= simulated}}},
  };
  out.write("bound.json", record.dump() + "\n");

  std::ostringstream os;
  os << "simulated max |spacing error| = " << format_fixed(simulated, 4) << " m\n";
  for (const BoundReport* b : {&trace, &root}) {
    os << (b->variant == JStarVariant::kTrace ? "  trace      " : "  sqrt_trace ") << "J*="
       << format_fixed(b->j_star, 4) << " beta2=" << format_fixed(b->beta2, 4)
       << " gamma2=" << format_fixed(b->gamma2, 4) << " eta=" << format_fixed(b->eta, 4)
       << " ||w0||2=" << format_fixed(b->w0_l2, 4) << " bound=" << format_fixed(b->bound, 4) << " m"
       << (b->bound >= simulated ? "  (dominates)" : "  (VIOLATED)") << "\n";
  }
  say(ctx, os.str());
  return finish("bound", sc, json{{"alpha_star", alpha_star}}, out);
}

// --- montecarlo ----------------------------------------------------------

std::string variance_csv(const SafetyStats& s) {
  std::ostringstream os;
  os << "time_s";
  for (std::size_t i = 1; i <= s.variance_series.size(); ++i) os << ",var_e" << i << "_m2";
  os << '\n';
  const std::size_t rows = s.variance_series.empty() ? 0 : s.variance_series.front().size();
  for (std::size_t k = 0; k < rows; ++k) {
    os << format_fixed(static_cast<double>(k) * s.dt, 6);
    for (const auto& series : s.variance_series) os << ',' << format_fixed(series[k]);
    os << '\n';
  }
  return os.str();
}

json safety_json(const SafetyStats& s) {
  return {{"realizations", s.realizations},
          {"collided", s.collided},
          {"total_events", s.total_events},
          {"p_collision", s.p_collision},
          {"mean_events_per_unstable",
           s.mean_events_per_unstable ? json(*s.mean_events_per_unstable) : json(nullptr)}};
}

RunManifest montecarlo(ScenarioConfig sc, const json& options, const Context& ctx) {
  sc.seed = option<std::uint64_t>(options, "seed", sc.seed);
  sc.realizations = option<std::uint64_t>(options, "realizations", sc.realizations);
  if (sc.realizations < 1) throw ConfigError("options.realizations", "must be >= 1");
  const std::string mode = option<std::string>(options, "mode", "both");
  const bool trajectories = option<bool>(options, "trajectories", false);
  std::vector<ControlMode> modes;
  if (mode == "acc" || mode == "both") modes.push_back(ControlMode::kAcc);
  if (mode == "cacc" || mode == "both") modes.push_back(ControlMode::kCacc);
  if (modes.empty()) throw ConfigError("options.mode", "expected acc, cacc or both; got '" + mode + "'");

  OutputDir out(ctx.out_dir);
  json summary = {{"command", "montecarlo"}, {"scenario", sc.name}, {"seed", sc.seed},
                  {"config_hash", config_hash(sc)}, {"modes", json::object()}};
  std::ostringstream report;
  for (ControlMode m : modes) {
    const std::string tag = m == ControlMode::kAcc ? "acc" : "cacc";
    ScenarioConfig run = sc;
    run.controller.mode = m;
    for (auto& [idx, c] : run.controller_overrides) c.mode = m;
    const SafetyStats stats = run_safety_study(run, ctx.workers, [&](const RealizationResult& r) {
      if (trajectories) out.write("trajectories/" + tag + "/r" + std::to_string(r.index) + ".csv", spacing_csv(r));
    });
    out.write("variance_" + tag + ".csv", variance_csv(stats));
    out.write("safety_" + tag + ".json", safety_json(stats).dump() + "\n");
    summary["modes"][tag] = safety_json(stats);
    report << tag << ": p_collision = " << format_fixed(stats.p_collision, 4) << " ("
           << stats.collided << "/" << stats.realizations << "), mean events per unstable platoon = "
           << (stats.mean_events_per_unstable ? format_fixed(*stats.mean_events_per_unstable, 4) : "n/a")
           << "\n";
  }
  out.write("summary.json", summary.dump() + "\n");
  say(ctx, report.str());
  return finish("montecarlo", sc,
                json{{"seed", sc.seed}, {"realizations", sc.realizations}, {"mode", mode},
                     {"trajectories", trajectories}},
                out);
}

// --- validate-mean -------------------------------------------------------

RunManifest validate_mean(ScenarioConfig sc, const json& options, const Context& ctx) {
  sc.seed = option<std::uint64_t>(options, "seed", sc.seed);
  const auto n = option<std::uint64_t>(options, "realizations", 1000);
  MeanTrajectoryReport rep;
  try {
    rep = validate_mean_trajectory(sc, n, ctx.workers);
  } catch (const InvalidInputError& e) {
    throw ConfigError("options.realizations", e.what());
  }

  static constexpr const char* kNames[3] = {"x", "v", "a"};
  std::ostringstream csv;
  csv << "time_s";
  for (std::size_t i = 0; i < rep.per_vehicle.size(); ++i) {
    for (const char* c : kNames) csv << ",dev_" << c << i << ",env_" << c << i;
  }
  csv << '\n';
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < rep.deviation.size(); ++k) {
    csv << format_fixed(static_cast<double>(k) * rep.dt, 6);
    for (std::size_t col = 0; col < rep.deviation[k].size(); ++col) {
      csv << ',' << format_sci(rep.deviation[k][col]) << ',' << format_sci(3.0 * rep.sample_sd[k][col] / root_n);
    }
    csv << '\n';
  }

  json vehicles = json::array();
  for (const auto& v : rep.per_vehicle) {
    json entry = json::object();
    for (std::size_t c = 0; c < 3; ++c) {
      entry[kNames[c]] = {{"max_deviation", v[c].max_deviation},
                          {"max_envelope", v[c].max_envelope},
                          {"fraction_within", v[c].fraction_within},
                          {"within", v[c].within()}};
    }
    vehicles.push_back(entry);
  }
  const json record = {{"scenario", sc.name},
                       {"realizations", n},
                       {"gamma", rep.gamma},
                       {"max_deviation", rep.max_deviation},
                       {"within_envelope", rep.within_envelope()},
                       {"vehicles", vehicles}};

  OutputDir out(ctx.out_dir);
  out.write("mean_deviation.csv", csv.str());
  out.write("mean_validation.json", record.dump() + "\n");
  say(ctx, "max |mean - deterministic| = " + format_sci(rep.max_deviation) + ", within 3-sigma envelope: " +
               (rep.within_envelope() ? "yes" : "no") + "\n");
  return finish("validate-mean", sc, json{{"seed", sc.seed}, {"realizations", n}}, out);
}

// --- channel-log ---------------------------------------------------------

RunManifest channel_log(ScenarioConfig sc, const json& options, const Context& ctx) {
  sc.seed = option<std::uint64_t>(options, "seed", sc.seed);
  const auto slots = option<std::uint64_t>(options, "slots", 100000);
  const auto pair = option<std::uint64_t>(options, "pair", 1);
  if (slots < 1) throw ConfigError("options.slots", "must be >= 1");
  const auto log = record_reception_log(sc.channel, slots, make_stream(sc.seed, 0, kChannelStreamBase + pair));
  std::vector<bool> received;
  received.reserve(log.size());
  for (const auto& r : log) received.push_back(r.received);

  OutputDir out(ctx.out_dir);
  std::ostringstream csv;
  write_reception_log_csv(csv, log);
  out.write("reception_log.csv", csv.str());
  const json record = {{"slots", slots},
                       {"gamma_estimate", gamma_estimate(received)},
                       {"iid_standard_error", gamma_standard_error(received)},
                       {"gamma_analytic", mean_reception(sc.channel)}};
  out.write("channel_summary.json", record.dump() + "\n");
  say(ctx, "gamma estimate = " + format_fixed(record["gamma_estimate"].get<double>(), 5) +
               " (analytic " + format_fixed(record["gamma_analytic"].get<double>(), 5) + ")\n");
  return finish("channel-log", sc, json{{"seed", sc.seed}, {"slots", slots}, {"pair", pair}}, out);
}

}  // namespace

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("PLATOON_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "platoon-out";
}

RunManifest run_command(const std::string& command, const std::optional<ScenarioConfig>& scenario,
                        const nlohmann::json& options, const Context& ctx) {
  if (command == "headway") return headway(options, ctx);
  const ScenarioConfig& sc = need(scenario, command);
  if (command == "simulate") return simulate(sc, options, ctx);
  if (command == "stability") return stability(sc, options, ctx);
  if (command == "bound") return bound(sc, options, ctx);
  if (command == "montecarlo") return montecarlo(sc, options, ctx);
  if (command == "validate-mean") return validate_mean(sc, options, ctx);
  if (command == "channel-log") return channel_log(sc, options, ctx);
  throw ConfigError("command", "unknown command '" + command + "'");
}

RunManifest replay(const std::filesystem::path& manifest_path, const Context& ctx) {
  const RunManifest m = read_manifest(manifest_path);
  std::optional<ScenarioConfig> scenario;
  if (!m.resolved_config.empty()) {
    scenario = parse_scenario(m.resolved_config);
    if (!m.config_hash.empty() && config_hash(*scenario) != m.config_hash) {
      throw ConfigError("manifest.config_hash", "does not match the recorded configuration");
    }
  }
  return run_command(m.command, scenario, m.options, ctx);
}

}  // namespace platoon::cli
