#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace platoon {

using Rng = std::mt19937_64;

/// Stream identifiers inside one realization. Channel streams are
/// kChannelStreamBase + pair index (pair i links follower i to vehicle i-1).
inline constexpr std::uint64_t kDecelStream = 0;
inline constexpr std::uint64_t kChannelStreamBase = 1;

/// Counter-based seed derivation: a SplitMix64 finalizer is folded over
/// (base seed, realization index, stream id), so every (realization, stream)
/// pair gets its own generator regardless of execution order.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t realization,
                          std::uint64_t stream);

Rng make_stream(std::uint64_t base_seed, std::uint64_t realization, std::uint64_t stream);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace platoon
