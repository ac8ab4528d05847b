#include "platoon/channel.hpp"

#include <cmath>
#include <ostream>

#include "platoon/errors.hpp"

namespace platoon {
namespace {

bool draw(double p, Rng& rng) { return std::bernoulli_distribution(p)(rng); }

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const GilbertParams& params) {
  if (!probability(params.p_gb) || !probability(params.p_bg) || !probability(params.q)) {
    throw InvalidInputError("Gilbert parameters P, Q, q must lie in [0, 1]");
  }
}

ChannelStep channel_step(ChannelState state, const GilbertParams& params, Rng& rng) {
  if (state.regime == Regime::kGood) {
    if (draw(params.p_gb, rng)) state.regime = Regime::kBad;
  } else {
    if (draw(params.p_bg, rng)) state.regime = Regime::kGood;
  }
  const bool received = state.regime == Regime::kGood || draw(params.q, rng);
  return {state, received};
}

ChannelState stationary_initial_state(const GilbertParams& params, Rng& rng) {
  const double total = params.p_gb + params.p_bg;
  if (total <= 0.0) return {};
  return {draw(params.p_gb / total, rng) ? Regime::kBad : Regime::kGood};
}

double gamma_analytic(const GilbertParams& params) {
  validate(params);
  const double total = params.p_gb + params.p_bg;
  if (!(total > 0.0)) {
    throw NumericalError(NumericalError::Kind::kUndefinedStationary,
                         "P + Q = 0: the Gilbert chain has no unique stationary distribution");
  }
  return 1.0 - params.p_gb * (1.0 - params.q) / total;
}

double gamma_estimate(const std::vector<bool>& reception_log) {
  if (reception_log.empty()) {
    throw NumericalError(NumericalError::Kind::kInsufficientData,
                         "cannot estimate gamma from an empty reception log");
  }
  std::size_t hits = 0;
  for (bool r : reception_log) hits += r ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(reception_log.size());
}

double gamma_standard_error(const std::vector<bool>& reception_log) {
  const double g = gamma_estimate(reception_log);
  return std::sqrt(g * (1.0 - g) / static_cast<double>(reception_log.size()));
}

bool iid_channel(double gamma, Rng& rng) {
  if (!probability(gamma)) throw InvalidInputError("gamma must lie in [0, 1]");
  return draw(gamma, rng);
}

void validate(const ChannelSpec& spec) {
  std::visit(Overloaded{
                 [](const IdealChannel&) {},
                 [](const IidChannel& c) {
                   if (!probability(c.gamma)) throw InvalidInputError("gamma must lie in [0, 1]");
                 },
                 [](const GilbertChannel& c) { validate(c.params); },
                 [](const DeterministicChannel& c) {
                   if (!probability(c.gamma)) throw InvalidInputError("gamma must lie in [0, 1]");
                 },
             },
             spec);
}

double mean_reception(const ChannelSpec& spec) {
  return std::visit(Overloaded{
                        [](const IdealChannel&) { return 1.0; },
                        [](const IidChannel& c) { return c.gamma; },
                        [](const GilbertChannel& c) { return gamma_analytic(c.params); },
                        [](const DeterministicChannel& c) { return c.gamma; },
                    },
                    spec);
}

bool is_stochastic(const ChannelSpec& spec) {
  return std::holds_alternative<IidChannel>(spec) || std::holds_alternative<GilbertChannel>(spec);
}

ChannelSpec deterministic_equivalent(const ChannelSpec& spec) {
  return DeterministicChannel{mean_reception(spec)};
}

Link::Link(ChannelSpec spec, Rng rng) : spec_(std::move(spec)), rng_(std::move(rng)) {
  validate(spec_);
  if (const auto* g = std::get_if<GilbertChannel>(&spec_)) {
    state_ = stationary_initial_state(g->params, rng_);
  }
}

Link::Slot Link::next() {
  return std::visit(Overloaded{
                        [](const IdealChannel&) { return Slot{1.0, true, Regime::kGood}; },
                        [this](const IidChannel& c) {
                          const bool r = draw(c.gamma, rng_);
                          return Slot{r ? 1.0 : 0.0, r, Regime::kGood};
                        },
                        [this](const GilbertChannel& c) {
                          const ChannelStep s = channel_step(state_, c.params, rng_);
                          state_ = s.state;
                          return Slot{s.received ? 1.0 : 0.0, s.received, s.state.regime};
                        },
                        [](const DeterministicChannel& c) {
                          return Slot{c.gamma, true, Regime::kGood};
                        },
                    },
                    spec_);
}

std::vector<ReceptionRecord> record_reception_log(const ChannelSpec& spec, std::size_t slots,
                                                  Rng rng) {
  Link link(spec, std::move(rng));
  std::vector<ReceptionRecord> log;
  log.reserve(slots);
  for (std::size_t k = 0; k < slots; ++k) {
    const Link::Slot s = link.next();
    log.push_back({k, s.regime, s.received});
  }
  return log;
}

void write_reception_log_csv(std::ostream& os, const std::vector<ReceptionRecord>& log) {
  os << "slot,regime,received\n";
  for (const auto& r : log) {
    os << r.slot << ',' << (r.regime == Regime::kGood ? "good" : "bad") << ','
       << (r.received ? 1 : 0) << '\n';
  }
}

}  // namespace platoon
