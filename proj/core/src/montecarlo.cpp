#include "platoon/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "platoon/control.hpp"
#include "platoon/errors.hpp"

namespace platoon {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Platoon {
  std::vector<VehicleParams> params;
  std::vector<ControllerConfig> controllers;  // index 0 unused
  std::vector<LagPropagator> propagators;
  std::vector<VehicleState> states;
};

Platoon build_platoon(const ScenarioConfig& sc, std::span<const double> decel_limits) {
  const int n = sc.n_followers + 1;
  Platoon p;
  p.params.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    VehicleParams vp = sc.vehicle_params(i);
    if (!decel_limits.empty()) vp.decel_limit = decel_limits[static_cast<std::size_t>(i)];
    p.params.push_back(vp);
    p.controllers.push_back(sc.controller_for(i));
    p.propagators.emplace_back(vp.tau, sc.dt_s);
  }
  p.states.resize(static_cast<std::size_t>(n));
  p.states[0] = VehicleState{0.0, sc.initial_speed_mps, 0.0};
  for (std::size_t i = 1; i < p.states.size(); ++i) {
    const double gap = sc.standstill_gap_m + p.params[i - 1].length + p.controllers[i].h_w * sc.initial_speed_mps;
    p.states[i] = VehicleState{p.states[i - 1].x - gap, sc.initial_speed_mps, 0.0};
  }
  return p;
}

double reference_gap(const ScenarioConfig& sc, const Platoon& p, std::size_t i) {
  return sc.standstill_gap_m + p.params[i - 1].length;
}

unsigned resolve_workers(unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  return workers;
}

}  // namespace

std::vector<std::pair<int, int>> detect_collisions(std::span<const double> positions,
                                                   std::span<const double> lengths) {
  if (positions.size() != lengths.size()) {
    throw InvalidInputError("detect_collisions: positions and lengths differ in size");
  }
  std::vector<std::pair<int, int>> events;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    const double gap = positions[i - 1] - lengths[i - 1] - positions[i];
    if (gap <= 0.0) events.emplace_back(static_cast<int>(i - 1), static_cast<int>(i));
  }
  return events;
}

std::vector<double> sample_decel_limits(const DecelDistribution& dist, std::size_t n, Rng& rng) {
  std::vector<double> out;
  out.reserve(n);
  std::visit(Overloaded{
                 [&](const FixedDecel& d) { out.assign(n, d.value); },
                 [&](const UniformDecel& d) {
                   std::uniform_real_distribution<double> u(d.lo, d.hi);
                   for (std::size_t i = 0; i < n; ++i) out.push_back(u(rng));
                 },
                 [&](const TruncatedNormalDecel& d) {
                   std::normal_distribution<double> normal(d.mean, d.sd);
                   for (std::size_t i = 0; i < n; ++i) {
                     double v = 0.0;
                     int tries = 0;
                     do {
                       if (++tries > 1'000'000) {
                         throw NumericalError(NumericalError::Kind::kInsufficientData,
                                              "truncated normal support has negligible mass");
                       }
                       v = normal(rng);
                     } while (v < d.lo || v > d.hi);
                     out.push_back(v);
                   }
                 },
             },
             dist);
  return out;
}

RealizationResult run_realization(const ScenarioConfig& sc, std::uint64_t index,
                                  const RunOptions& options) {
  validate(sc);
  const auto n_vehicles = static_cast<std::size_t>(sc.n_followers) + 1;
  const std::size_t steps = sc.steps();
  const double dt = sc.dt_s;

  RealizationResult result;
  result.index = index;
  result.dt = dt;

  if (sc.decel) {
    Rng decel_rng = make_stream(sc.seed, index, kDecelStream);
    result.decel_limits = sample_decel_limits(*sc.decel, n_vehicles, decel_rng);
  }
  Platoon p = build_platoon(sc, result.decel_limits);
  if (!sc.decel) {
    for (const auto& vp : p.params) result.decel_limits.push_back(vp.decel_limit);
  }

  std::vector<Link> links;
  links.reserve(n_vehicles);
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    links.emplace_back(sc.channel, make_stream(sc.seed, index, kChannelStreamBase + i));
  }

  result.spacing_errors.assign(n_vehicles - 1, std::vector<double>(steps + 1, 0.0));
  if (options.record_states) result.states.reserve(steps + 1);

  std::vector<double> lengths(n_vehicles);
  for (std::size_t i = 0; i < n_vehicles; ++i) lengths[i] = p.params[i].length;
  std::vector<double> positions(n_vehicles);
  std::vector<char> frozen(n_vehicles, 0);
  std::vector<char> pair_hit(n_vehicles, 0);  // pair_hit[i]: pair (i-1, i) reported
  std::vector<double> u(n_vehicles, 0.0);

  auto record = [&](std::size_t k) {
    for (std::size_t i = 1; i < n_vehicles; ++i) {
      result.spacing_errors[i - 1][k] =
          spacing_error(p.states[i], p.states[i - 1], p.controllers[i].h_w, reference_gap(sc, p, i));
    }
    if (options.record_states) result.states.push_back(p.states);
  };

  for (std::size_t k = 0; k < steps; ++k) {
    record(k);
    const double t = static_cast<double>(k) * dt;

    u[0] = saturate(leader_input(sc.leader, p.states[0], t, p.params[0].tau), p.params[0]);
    for (std::size_t i = 1; i < n_vehicles; ++i) {
      const ControllerConfig& cfg = p.controllers[i];
      const double d = reference_gap(sc, p, i);
      double cmd = 0.0;
      if (cfg.mode == ControlMode::kCacc) {
        const Link::Slot slot = links[i].next();
        cmd = cacc_control_weighted(p.states[i], p.states[i - 1], p.states[i - 1].a, slot.weight, cfg, d);
      } else {
        cmd = acc_control(p.states[i], p.states[i - 1], cfg, d);
      }
      u[i] = saturate(cmd, p.params[i]);
    }

    for (std::size_t i = 0; i < n_vehicles; ++i) {
      if (!frozen[i]) p.states[i] = p.propagators[i].step(p.states[i], u[i]);
    }

    for (std::size_t i = 0; i < n_vehicles; ++i) positions[i] = p.states[i].x;
    for (const auto& [front, rear] : detect_collisions(positions, lengths)) {
      const auto r = static_cast<std::size_t>(rear);
      if (pair_hit[r]) continue;
      pair_hit[r] = 1;
      result.collisions.push_back({static_cast<double>(k + 1) * dt, front, rear});
      for (std::size_t v : {static_cast<std::size_t>(front), r}) {
        frozen[v] = 1;
        p.states[v].v = 0.0;
        p.states[v].a = 0.0;
      }
    }
  }
  record(steps);
  return result;
}

void SafetyAccumulator::add(const RealizationResult& r) {
  if (n_ == 0) {
    dt_ = r.dt;
    mean_.assign(r.spacing_errors.size(), {});
    m2_.assign(r.spacing_errors.size(), {});
    for (std::size_t i = 0; i < r.spacing_errors.size(); ++i) {
      mean_[i].assign(r.spacing_errors[i].size(), 0.0);
      m2_[i].assign(r.spacing_errors[i].size(), 0.0);
    }
  } else if (r.spacing_errors.size() != mean_.size() ||
             (!mean_.empty() && r.spacing_errors.front().size() != mean_.front().size())) {
    throw InvalidInputError("aggregate_stats: realizations have different shapes");
  }
  ++n_;
  if (r.collided()) ++collided_;
  events_ += r.collisions.size();
  const double n = static_cast<double>(n_);
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    auto& mean = mean_[i];
    auto& m2 = m2_[i];
    const auto& series = r.spacing_errors[i];
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double delta = series[k] - mean[k];
      mean[k] += delta / n;
      m2[k] += delta * (series[k] - mean[k]);
    }
  }
}

SafetyStats SafetyAccumulator::finish() const {
  if (n_ == 0) throw InvalidInputError("aggregate_stats: no realizations");
  SafetyStats s;
  s.realizations = n_;
  s.collided = collided_;
  s.total_events = events_;
  s.p_collision = static_cast<double>(collided_) / static_cast<double>(n_);
  if (collided_ > 0) s.mean_events_per_unstable = static_cast<double>(events_) / static_cast<double>(collided_);
  s.dt = dt_;
  s.variance_series = m2_;
  for (auto& series : s.variance_series) {
    for (double& v : series) v = n_ > 1 ? v / static_cast<double>(n_ - 1) : 0.0;
  }
  return s;
}

SafetyStats aggregate_stats(std::span<const RealizationResult> results) {
  SafetyAccumulator acc;
  for (const auto& r : results) acc.add(r);
  return acc.finish();
}

void for_each_realization(const ScenarioConfig& scenario, std::uint64_t first_index,
                          std::uint64_t count, unsigned workers, const RunOptions& options,
                          const std::function<void(RealizationResult&&)>& sink) {
  validate(scenario);
  workers = resolve_workers(workers);
  if (workers == 1) {
    for (std::uint64_t j = 0; j < count; ++j) sink(run_realization(scenario, first_index + j, options));
    return;
  }

  const std::uint64_t batch = 32ULL * workers;
  std::vector<RealizationResult> slots;
  for (std::uint64_t start = 0; start < count; start += batch) {
    const std::uint64_t size = std::min(batch, count - start);
    slots.assign(size, {});
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::uint64_t j = next++; j < size && !failed; j = next++) {
          try {
            slots[j] = run_realization(scenario, first_index + start + j, options);
          } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    for (auto& r : slots) sink(std::move(r));
  }
}

SafetyStats run_safety_study(const ScenarioConfig& scenario, unsigned workers,
                             const std::function<void(const RealizationResult&)>& observe) {
  SafetyAccumulator acc;
  for_each_realization(scenario, 0, scenario.realizations, workers, {}, [&](RealizationResult&& r) {
    if (observe) observe(r);
    acc.add(r);
  });
  return acc.finish();
}

bool MeanTrajectoryReport::within_envelope() const {
  for (const auto& vehicle : per_vehicle) {
    for (const auto& c : vehicle) {
      if (!c.within()) return false;
    }
  }
  return true;
}

MeanTrajectoryReport validate_mean_trajectory(const ScenarioConfig& scenario,
                                              std::size_t n_realizations, unsigned workers) {
  if (n_realizations < 100) throw InvalidInputError("mean-trajectory validation needs >= 100 realizations");
  validate(scenario);

  ScenarioConfig reference = scenario;
  reference.channel = deterministic_equivalent(scenario.channel);
  const RealizationResult det = run_realization(reference, 0, RunOptions{true});

  const std::size_t n_vehicles = static_cast<std::size_t>(scenario.n_followers) + 1;
  const std::size_t width = 3 * n_vehicles;
  const std::size_t rows = det.states.size();
  std::vector<std::vector<double>> mean(rows, std::vector<double>(width, 0.0));
  std::vector<std::vector<double>> m2(rows, std::vector<double>(width, 0.0));

  std::size_t seen = 0;
  for_each_realization(scenario, 0, n_realizations, workers, RunOptions{true}, [&](RealizationResult&& r) {
    ++seen;
    const double n = static_cast<double>(seen);
    for (std::size_t k = 0; k < rows; ++k) {
      for (std::size_t i = 0; i < n_vehicles; ++i) {
        const VehicleState& s = r.states[k][i];
        const double vals[3] = {s.x, s.v, s.a};
        for (std::size_t c = 0; c < 3; ++c) {
          const std::size_t col = 3 * i + c;
          const double delta = vals[c] - mean[k][col];
          mean[k][col] += delta / n;
          m2[k][col] += delta * (vals[c] - mean[k][col]);
        }
      }
    }
  });

  MeanTrajectoryReport rep;
  rep.realizations = n_realizations;
  rep.gamma = mean_reception(scenario.channel);
  rep.dt = scenario.dt_s;
  rep.per_vehicle.assign(n_vehicles, {});
  rep.deviation.assign(rows, std::vector<double>(width, 0.0));
  rep.sample_sd.assign(rows, std::vector<double>(width, 0.0));
  std::vector<std::size_t> within(width, 0);
  const double root_n = std::sqrt(static_cast<double>(n_realizations));

  for (std::size_t k = 0; k < rows; ++k) {
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      const VehicleState& s = det.states[k][i];
      const double ref[3] = {s.x, s.v, s.a};
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t col = 3 * i + c;
        const double dev = mean[k][col] - ref[c];
        const double sd = std::sqrt(m2[k][col] / static_cast<double>(n_realizations - 1));
        const double envelope = 3.0 * sd / root_n;
        rep.deviation[k][col] = dev;
        rep.sample_sd[k][col] = sd;
        auto& cd = rep.per_vehicle[i][c];
        cd.max_deviation = std::max(cd.max_deviation, std::abs(dev));
        cd.max_envelope = std::max(cd.max_envelope, envelope);
        if (std::abs(dev) <= envelope) ++within[col];
        rep.max_deviation = std::max(rep.max_deviation, std::abs(dev));
      }
    }
  }
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      rep.per_vehicle[i][c].fraction_within =
          static_cast<double>(within[3 * i + c]) / static_cast<double>(rows);
    }
  }
  return rep;
}

}  // namespace platoon
