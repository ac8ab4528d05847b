#include "platoon/scenario.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "platoon/csv.hpp"
#include "platoon/errors.hpp"
#include "platoon/random.hpp"

namespace platoon {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (s == "max" || s == "+max") return std::numeric_limits<double>::infinity();
  if (s == "-max") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Section {
 public:
  Section(std::string name, std::map<std::string, Entry> entries)
      : name_(std::move(name)), entries_(std::move(entries)) {}

  std::string path(const std::string& key) const { return name_ + "." + key; }

  const Entry* find(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::optional<double> number(const std::string& key) {
    const Entry* e = find(key);
    if (e == nullptr) return std::nullopt;
    const auto v = to_double(e->value);
    if (!v || std::isinf(*v)) {
      throw ConfigError(path(key), "expected a finite number, got '" + e->value + "'");
    }
    return v;
  }

  double number_or(const std::string& key, double fallback) {
    return number(key).value_or(fallback);
  }

  double required_number(const std::string& key) {
    const auto v = number(key);
    if (!v) throw ConfigError(path(key), "required key is missing");
    return *v;
  }

  std::optional<std::uint64_t> count(const std::string& key) {
    const Entry* e = find(key);
    if (e == nullptr) return std::nullopt;
    const auto v = to_uint(e->value);
    if (!v) throw ConfigError(path(key), "expected a non-negative integer, got '" + e->value + "'");
    return v;
  }

  std::optional<std::string> text(const std::string& key) {
    const Entry* e = find(key);
    if (e == nullptr) return std::nullopt;
    return e->value;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : entries_) {
      if (!used_.count(key)) {
        throw ConfigError(path(key), "unknown key (line " + std::to_string(entry.line) + ")");
      }
    }
  }

 private:
  std::string name_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
};

std::map<std::string, std::map<std::string, Entry>> tokenize(std::string_view text) {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::string current;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("", "line " + std::to_string(line_no) + ": malformed section header");
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (sections.count(current)) {
        throw ConfigError(current, "section declared twice (line " + std::to_string(line_no) + ")");
      }
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(current, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (current.empty()) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": key outside of a section");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    auto& sec = sections[current];
    if (sec.count(key)) {
      throw ConfigError(current + "." + key, "duplicate key (line " + std::to_string(line_no) + ")");
    }
    sec[key] = Entry{value, line_no};
  }
  return sections;
}

// Splits "vehicle.3" into ("vehicle", 3).
std::optional<std::pair<std::string, int>> indexed(const std::string& name) {
  const auto dot = name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  const auto idx = to_uint(std::string_view(name).substr(dot + 1));
  if (!idx || *idx > 100000) return std::nullopt;
  return std::make_pair(name.substr(0, dot), static_cast<int>(*idx));
}

VehicleParams read_vehicle(Section& s, const VehicleParams& base) {
  VehicleParams p = base;
  p.tau = s.number_or("tau_s", p.tau);
  p.length = s.number_or("length_m", p.length);
  p.decel_limit = s.number_or("decel_limit_mps2", p.decel_limit);
  p.accel_limit = s.number_or("accel_limit_mps2", p.accel_limit);
  return p;
}

ControllerConfig read_controller(Section& s, const ControllerConfig& base) {
  ControllerConfig c = base;
  if (auto mode = s.text("mode")) {
    if (*mode == "acc") {
      c.mode = ControlMode::kAcc;
    } else if (*mode == "cacc") {
      c.mode = ControlMode::kCacc;
    } else {
      throw ConfigError(s.path("mode"), "expected 'acc' or 'cacc', got '" + *mode + "'");
    }
  }
  c.k_a = s.number_or("ka", c.k_a);
  c.k_v = s.number_or("kv_per_s", c.k_v);
  c.k_p = s.number_or("kp_per_s2", c.k_p);
  c.h_w = s.number_or("hw_s", c.h_w);
  return c;
}

ChannelSpec read_channel(Section& s) {
  const std::string model = s.text("model").value_or("ideal");
  if (model == "ideal") return IdealChannel{};
  if (model == "iid") return IidChannel{s.required_number("gamma")};
  if (model == "deterministic") return DeterministicChannel{s.required_number("gamma")};
  if (model == "gilbert") {
    return GilbertChannel{GilbertParams{s.required_number("p_gb"), s.required_number("p_bg"),
                                        s.required_number("q_bad")}};
  }
  throw ConfigError(s.path("model"), "expected ideal, iid, gilbert or deterministic; got '" + model + "'");
}

LeaderProfile read_leader(Section& s) {
  LeaderProfile profile;
  const auto text = s.text("segments");
  if (!text || trim(*text).empty()) return profile;
  for (std::string_view group : split(*text, ';')) {
    if (group.empty()) continue;
    const auto w = words(group);
    if (w.size() < 2 || w.size() > 3) {
      throw ConfigError(s.path("segments"),
                        "each segment is 'start_s u_mps2 [target_mps]', got '" + std::string(group) + "'");
    }
    LeaderSegment seg;
    const auto start = to_double(w[0]);
    const auto u = to_double(w[1]);
    if (!start || !std::isfinite(*start) || !u) {
      throw ConfigError(s.path("segments"), "bad number in segment '" + std::string(group) + "'");
    }
    seg.start_s = *start;
    seg.u_mps2 = *u;
    if (w.size() == 3) {
      const auto target = to_double(w[2]);
      if (!target || !std::isfinite(*target)) {
        throw ConfigError(s.path("segments"), "bad target in segment '" + std::string(group) + "'");
      }
      seg.target_mps = *target;
    }
    profile.segments.push_back(seg);
  }
  return profile;
}

std::optional<DecelDistribution> read_decel(Section& s) {
  const std::string kind = s.text("distribution").value_or("none");
  if (kind == "none") return std::nullopt;
  if (kind == "fixed") return FixedDecel{s.required_number("value_mps2")};
  if (kind == "uniform") return UniformDecel{s.required_number("min_mps2"), s.required_number("max_mps2")};
  if (kind == "truncated_normal") {
    return TruncatedNormalDecel{s.required_number("mean_mps2"), s.required_number("sd_mps2"),
                                s.required_number("min_mps2"), s.required_number("max_mps2")};
  }
  throw ConfigError(s.path("distribution"),
                    "expected none, fixed, uniform or truncated_normal; got '" + kind + "'");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "max" : "-max";
  return format_shortest(v);
}

void write_vehicle(std::ostringstream& os, const VehicleParams& p) {
  os << "tau_s = " << num(p.tau) << "\n"
     << "length_m = " << num(p.length) << "\n"
     << "decel_limit_mps2 = " << num(p.decel_limit) << "\n"
     << "accel_limit_mps2 = " << num(p.accel_limit) << "\n";
}

void write_controller(std::ostringstream& os, const ControllerConfig& c) {
  os << "mode = " << (c.mode == ControlMode::kAcc ? "acc" : "cacc") << "\n"
     << "ka = " << num(c.k_a) << "\n"
     << "kv_per_s = " << num(c.k_v) << "\n"
     << "kp_per_s2 = " << num(c.k_p) << "\n"
     << "hw_s = " << num(c.h_w) << "\n";
}

}  // namespace

VehicleParams ScenarioConfig::vehicle_params(int index) const {
  const auto it = vehicle_overrides.find(index);
  return it == vehicle_overrides.end() ? vehicle : it->second;
}

ControllerConfig ScenarioConfig::controller_for(int index) const {
  const auto it = controller_overrides.find(index);
  return it == controller_overrides.end() ? controller : it->second;
}

std::size_t ScenarioConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration_s / dt_s));
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.n_followers < 1) throw ConfigError("platoon.followers", "need at least one follower");
  if (!(cfg.initial_speed_mps >= 0.0)) throw ConfigError("platoon.initial_speed_mps", "must be >= 0");
  if (!(cfg.standstill_gap_m >= 0.0)) throw ConfigError("platoon.standstill_gap_m", "must be >= 0");
  if (!(cfg.dt_s > 0.0)) throw ConfigError("run.dt_s", "must be positive");
  if (!(cfg.duration_s > 0.0)) throw ConfigError("run.duration_s", "must be positive");
  if (cfg.steps() < 1) throw ConfigError("run.duration_s", "shorter than one step");
  if (cfg.realizations < 1) throw ConfigError("run.realizations", "must be >= 1");

  auto check_vehicle = [](const VehicleParams& p, const std::string& section) {
    try {
      validate(p);
    } catch (const InvalidInputError& e) {
      throw ConfigError(section, e.what());
    }
  };
  auto check_controller = [](const ControllerConfig& c, const std::string& section) {
    try {
      validate(c);
    } catch (const InvalidInputError& e) {
      throw ConfigError(section, e.what());
    }
  };
  check_vehicle(cfg.vehicle, "vehicle");
  check_controller(cfg.controller, "controller");
  for (const auto& [idx, p] : cfg.vehicle_overrides) {
    if (idx < 0 || idx > cfg.n_followers) {
      throw ConfigError("vehicle." + std::to_string(idx), "index outside the platoon");
    }
    check_vehicle(p, "vehicle." + std::to_string(idx));
  }
  for (const auto& [idx, c] : cfg.controller_overrides) {
    if (idx < 1 || idx > cfg.n_followers) {
      throw ConfigError("controller." + std::to_string(idx), "index must name a follower");
    }
    check_controller(c, "controller." + std::to_string(idx));
  }
  try {
    validate(cfg.channel);
  } catch (const InvalidInputError& e) {
    throw ConfigError("channel", e.what());
  }
  if (const auto* g = std::get_if<GilbertChannel>(&cfg.channel)) {
    if (g->params.p_gb + g->params.p_bg <= 0.0) {
      throw ConfigError("channel.p_gb", "P + Q must be positive for a stationary reception rate");
    }
  }
  try {
    validate(cfg.leader);
  } catch (const InvalidInputError& e) {
    throw ConfigError("leader.segments", e.what());
  }
  if (cfg.decel) {
    std::visit(Overloaded{
                   [](const FixedDecel& d) {
                     if (!(d.value > 0.0)) throw ConfigError("decel.value_mps2", "must be positive");
                   },
                   [](const UniformDecel& d) {
                     if (!(d.lo > 0.0 && d.hi >= d.lo)) {
                       throw ConfigError("decel.min_mps2", "need 0 < min <= max");
                     }
                   },
                   [](const TruncatedNormalDecel& d) {
                     if (!(d.sd > 0.0)) throw ConfigError("decel.sd_mps2", "must be positive");
                     if (!(d.lo > 0.0 && d.hi > d.lo)) throw ConfigError("decel.min_mps2", "need 0 < min < max");
                   },
               },
               *cfg.decel);
  }
}

ScenarioConfig parse_scenario(std::string_view text) {
  auto sections = tokenize(text);
  ScenarioConfig cfg;
  auto take = [&](const std::string& name) {
    auto it = sections.find(name);
    std::map<std::string, Entry> entries;
    if (it != sections.end()) {
      entries = std::move(it->second);
      sections.erase(it);
    }
    return Section(name, std::move(entries));
  };

  {
    Section s = take("scenario");
    cfg.name = s.text("name").value_or(cfg.name);
    s.reject_unknown();
  }
  {
    Section s = take("platoon");
    const auto followers = s.count("followers");
    if (!followers) throw ConfigError("platoon.followers", "required key is missing");
    cfg.n_followers = static_cast<int>(*followers);
    cfg.initial_speed_mps = s.number_or("initial_speed_mps", cfg.initial_speed_mps);
    cfg.standstill_gap_m = s.number_or("standstill_gap_m", cfg.standstill_gap_m);
    s.reject_unknown();
  }
  {
    Section s = take("vehicle");
    if (!s.find("tau_s")) throw ConfigError("vehicle.tau_s", "required key is missing");
    cfg.vehicle = read_vehicle(s, cfg.vehicle);
    s.reject_unknown();
  }
  {
    Section s = take("controller");
    for (const char* key : {"mode", "kv_per_s", "kp_per_s2", "hw_s"}) {
      if (!s.find(key)) throw ConfigError(std::string("controller.") + key, "required key is missing");
    }
    cfg.controller = read_controller(s, cfg.controller);
    s.reject_unknown();
  }
  {
    Section s = take("channel");
    cfg.channel = read_channel(s);
    s.reject_unknown();
  }
  {
    Section s = take("leader");
    cfg.leader = read_leader(s);
    s.reject_unknown();
  }
  {
    Section s = take("decel");
    cfg.decel = read_decel(s);
    s.reject_unknown();
  }
  {
    Section s = take("run");
    cfg.dt_s = s.number_or("dt_s", cfg.dt_s);
    cfg.duration_s = s.required_number("duration_s");
    cfg.realizations = s.count("realizations").value_or(cfg.realizations);
    cfg.seed = s.count("seed").value_or(cfg.seed);
    s.reject_unknown();
  }

  // Remaining sections must be per-vehicle overrides.
  for (auto& [name, entries] : sections) {
    const auto idx = indexed(name);
    if (idx && idx->first == "vehicle") {
      Section s(name, std::move(entries));
      cfg.vehicle_overrides[idx->second] = read_vehicle(s, cfg.vehicle);
      s.reject_unknown();
    } else if (idx && idx->first == "controller") {
      Section s(name, std::move(entries));
      cfg.controller_overrides[idx->second] = read_controller(s, cfg.controller);
      s.reject_unknown();
    } else {
      throw ConfigError(name, "unknown section");
    }
  }

  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "[scenario]\nname = " << cfg.name << "\n\n";
  os << "[platoon]\nfollowers = " << cfg.n_followers << "\n"
     << "initial_speed_mps = " << num(cfg.initial_speed_mps) << "\n"
     << "standstill_gap_m = " << num(cfg.standstill_gap_m) << "\n\n";
  os << "[vehicle]\n";
  write_vehicle(os, cfg.vehicle);
  os << "\n[controller]\n";
  write_controller(os, cfg.controller);
  os << "\n[channel]\n";
  std::visit(Overloaded{
                 [&](const IdealChannel&) { os << "model = ideal\n"; },
                 [&](const IidChannel& c) { os << "model = iid\ngamma = " << num(c.gamma) << "\n"; },
                 [&](const GilbertChannel& c) {
                   os << "model = gilbert\np_gb = " << num(c.params.p_gb) << "\np_bg = " << num(c.params.p_bg)
                      << "\nq_bad = " << num(c.params.q) << "\n";
                 },
                 [&](const DeterministicChannel& c) {
                   os << "model = deterministic\ngamma = " << num(c.gamma) << "\n";
                 },
             },
             cfg.channel);
  os << "\n[leader]\nsegments =";
  for (std::size_t i = 0; i < cfg.leader.segments.size(); ++i) {
    const auto& seg = cfg.leader.segments[i];
    os << (i == 0 ? " " : "; ") << num(seg.start_s) << ' ' << num(seg.u_mps2);
    if (seg.target_mps) os << ' ' << num(*seg.target_mps);
  }
  os << "\n\n[decel]\n";
  if (!cfg.decel) {
    os << "distribution = none\n";
  } else {
    std::visit(Overloaded{
                   [&](const FixedDecel& d) { os << "distribution = fixed\nvalue_mps2 = " << num(d.value) << "\n"; },
                   [&](const UniformDecel& d) {
                     os << "distribution = uniform\nmin_mps2 = " << num(d.lo) << "\nmax_mps2 = " << num(d.hi) << "\n";
                   },
                   [&](const TruncatedNormalDecel& d) {
                     os << "distribution = truncated_normal\nmean_mps2 = " << num(d.mean) << "\nsd_mps2 = "
                        << num(d.sd) << "\nmin_mps2 = " << num(d.lo) << "\nmax_mps2 = " << num(d.hi) << "\n";
                   },
               },
               *cfg.decel);
  }
  os << "\n[run]\ndt_s = " << num(cfg.dt_s) << "\nduration_s = " << num(cfg.duration_s)
     << "\nrealizations = " << cfg.realizations << "\nseed = " << cfg.seed << "\n";
  for (const auto& [idx, p] : cfg.vehicle_overrides) {
    os << "\n[vehicle." << idx << "]\n";
    write_vehicle(os, p);
  }
  for (const auto& [idx, c] : cfg.controller_overrides) {
    os << "\n[controller." << idx << "]\n";
    write_controller(os, c);
  }
  return os.str();
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::uint64_t h = fnv1a64(serialize_scenario(cfg));
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

}  // namespace platoon
