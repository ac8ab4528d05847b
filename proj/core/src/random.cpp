#include "platoon/random.hpp"

namespace platoon {
namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t realization,
                          std::uint64_t stream) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ realization);
  h = splitmix64(h ^ (stream * 0xd1342543de82ef95ULL));
  return h;
}

Rng make_stream(std::uint64_t base_seed, std::uint64_t realization, std::uint64_t stream) {
  return Rng(derive_seed(base_seed, realization, stream));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace platoon
