#include "relaydetect/random.hpp"

namespace relaydetect {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t arm,
                          std::uint64_t index) noexcept {
  return mix64(mix64(mix64(master) ^ arm) ^ index);
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomStream::normal() { return normal_(engine_); }

int RandomStream::sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

double RandomStream::uniform() { return uniform_(engine_); }

}  // namespace relaydetect
