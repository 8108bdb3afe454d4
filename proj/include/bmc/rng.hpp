#pragma once

#include <cstdint>
#include <string_view>

namespace bmc {

// Counter-based generator: every draw is a pure function of (key, counter),
// so any substream (phase, cell, draw) can be regenerated independently and in
// any order. The mixer is the SplitMix64 finalizer.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t key() const { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ ^ mix(counter + 0x632be59bd9b4e019ULL));
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1), for logs.
  constexpr double open_uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Independent child stream.
  constexpr CounterRng substream(std::uint64_t tag) const {
    return CounterRng(mix(key_ ^ mix(tag ^ 0xd1b54a32d192ed03ULL)));
  }

 private:
  std::uint64_t key_;
};

// Stable 64-bit tag for a phase name (FNV-1a).
constexpr std::uint64_t phase_tag(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream for a named phase under a master seed.
constexpr CounterRng stream(std::uint64_t seed, std::string_view phase) {
  return CounterRng(seed).substream(phase_tag(phase));
}

}  // namespace bmc
