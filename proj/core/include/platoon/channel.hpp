#pragma once

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "platoon/random.hpp"

namespace platoon {

/// Two-state burst-loss channel. `p_gb` (P) and `p_bg` (Q) are per-slot
/// transition probabilities Good->Bad and Bad->Good; the Good state delivers
/// every packet and the Bad state delivers with probability `q`. P and Q are
/// usually small so that regimes persist over many slots.
struct GilbertParams {
  double p_gb = 0.0;
  double p_bg = 0.0;
  double q = 1.0;

  friend bool operator==(const GilbertParams&, const GilbertParams&) = default;
};

void validate(const GilbertParams& params);

enum class Regime : std::uint8_t { kGood, kBad };

struct ChannelState {
  Regime regime = Regime::kGood;

  friend bool operator==(const ChannelState&, const ChannelState&) = default;
};

struct ChannelStep {
  ChannelState state;
  bool received = true;
};

/// One packet slot: the regime transitions first, then reception is drawn in
/// the new regime.
ChannelStep channel_step(ChannelState state, const GilbertParams& params, Rng& rng);

/// Draws the initial regime from the stationary law (Bad w.p. P/(P+Q)).
/// With P+Q = 0 the chain never moves and Good is returned.
ChannelState stationary_initial_state(const GilbertParams& params, Rng& rng);

/// Stationary reception probability 1 - P(1-q)/(P+Q).
/// Throws NumericalError(kUndefinedStationary) when P+Q = 0.
double gamma_analytic(const GilbertParams& params);

/// Sample mean of a reception log. Throws NumericalError(kInsufficientData)
/// on an empty log.
double gamma_estimate(const std::vector<bool>& reception_log);

/// sqrt(g(1-g)/n): the standard error under i.i.d. receptions. Bursty logs
/// have positively correlated slots, so the true error is larger.
double gamma_standard_error(const std::vector<bool>& reception_log);

/// Bernoulli(gamma) reception.
bool iid_channel(double gamma, Rng& rng);

struct IdealChannel {
  friend bool operator==(const IdealChannel&, const IdealChannel&) = default;
};
struct IidChannel {
  double gamma = 1.0;
  friend bool operator==(const IidChannel&, const IidChannel&) = default;
};
struct GilbertChannel {
  GilbertParams params;
  friend bool operator==(const GilbertChannel&, const GilbertChannel&) = default;
};
/// Not a random channel: the feed-forward term is scaled by gamma every slot.
struct DeterministicChannel {
  double gamma = 1.0;
  friend bool operator==(const DeterministicChannel&, const DeterministicChannel&) = default;
};

using ChannelSpec = std::variant<IdealChannel, IidChannel, GilbertChannel, DeterministicChannel>;

void validate(const ChannelSpec& spec);

/// E[w] for the channel: 1, gamma, or the Gilbert stationary value.
double mean_reception(const ChannelSpec& spec);

bool is_stochastic(const ChannelSpec& spec);

/// The deterministic-equivalent channel of `spec` (gamma = mean_reception).
ChannelSpec deterministic_equivalent(const ChannelSpec& spec);

/// A single V2V link with its own regime and random stream.
class Link {
 public:
  struct Slot {
    double weight = 1.0;  ///< multiplier applied to the feed-forward term
    bool received = true;
    Regime regime = Regime::kGood;
  };

  Link(ChannelSpec spec, Rng rng);

  Slot next();

 private:
  ChannelSpec spec_;
  Rng rng_;
  ChannelState state_;
};

struct ReceptionRecord {
  std::uint64_t slot = 0;
  Regime regime = Regime::kGood;
  bool received = true;
};

std::vector<ReceptionRecord> record_reception_log(const ChannelSpec& spec, std::size_t slots,
                                                  Rng rng);

/// CSV with header `slot,regime,received`; regime is `good`/`bad`, received 0/1.
void write_reception_log_csv(std::ostream& os, const std::vector<ReceptionRecord>& log);

}  // namespace platoon
