#ifndef RWRE_STREAM_HPP
#define RWRE_STREAM_HPP

#include <array>
#include <cstdint>

#include "rwre/vec.hpp"

namespace rwre {

// Counter-based randomness. Every variate in the program is a pure function of
// a StreamKey and a position inside that key's stream, so nothing depends on the
// order in which streams are queried or on how work is split across threads.

/// Stream purpose discriminators. Values are part of the output contract:
/// renumbering changes every simulated number.
enum class StreamTag : std::uint32_t {
  site = 1,         // environment law parameters at (level, cell)
  offset = 2,       // lattice embedding offset U
  walk = 3,         // one quenched step of a walk
  jitter = 4,       // lattice de-discretisation in KS checks
  bootstrap = 5,    // replica resampling
  seed_derive = 6,  // derive_seed
  synthetic = 7,    // calibration harnesses
};

/// Roles used with derive_seed to split a master seed into independent seeds.
enum class SeedRole : std::uint32_t {
  environment = 1,
  environment_alt = 2,
  walk = 3,
  walk_alt = 4,
  bootstrap = 5,
  jitter = 6,
  phi_environment = 7,
  chain = 8,
  calibration = 9,
};

struct StreamKey {
  std::uint64_t master_seed = 0;
  std::int64_t level = 0;
  std::array<std::int64_t, kMaxDim> cell{};
  std::uint32_t tag = 0;

  bool operator==(const StreamKey&) const = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t key_digest(const StreamKey& k) {
  std::uint64_t h = mix64(k.master_seed ^ 0x243f6a8885a308d3ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(k.level));
  for (int i = 0; i < kMaxDim; ++i) {
    h = mix64(h ^ (static_cast<std::uint64_t>(k.cell[i]) + 0x13198a2e03707344ULL * (i + 1)));
  }
  return mix64(h ^ (static_cast<std::uint64_t>(k.tag) << 32 | 0xa4093822ULL));
}

/// Maps 64 random bits to [0, 1) with 53-bit resolution.
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Replayable uniform stream. at(i) never depends on the cursor; next() is a
/// convenience that walks the cursor forward.
class Stream {
 public:
  explicit constexpr Stream(const StreamKey& key) : digest_(key_digest(key)) {}

  constexpr double at(std::uint64_t index) const {
    return to_unit(mix64(digest_ + 0x9e3779b97f4a7c15ULL * (index + 1)));
  }
  constexpr double next() { return at(position_++); }
  /// Uniform in (0, 1]; safe to pass to log().
  constexpr double next_open() { return 1.0 - next(); }

  constexpr std::uint64_t position() const { return position_; }

 private:
  std::uint64_t digest_;
  std::uint64_t position_ = 0;
};

inline Stream derive_stream(const StreamKey& key) { return Stream(key); }

/// Deterministic child seed for (master, index, role).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedRole role) {
  StreamKey k;
  k.master_seed = master;
  k.level = static_cast<std::int64_t>(index);
  k.tag = static_cast<std::uint32_t>(StreamTag::seed_derive) << 8 | static_cast<std::uint32_t>(role);
  return mix64(key_digest(k));
}

}  // namespace rwre

#endif  // RWRE_STREAM_HPP
