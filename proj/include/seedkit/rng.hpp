#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace seedkit {

namespace detail {
// SplitMix64 finalizer (Stafford variant 13).
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

// Deterministic generator (SplitMix64). Every random draw in the toolkit goes
// through an explicitly seeded instance; there is no global generator state,
// which is what makes per-item seed derivation parallelism-safe.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return double(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n), unbiased via rejection. n must be > 0.
  uint64_t next_below(uint64_t n) {
    const uint64_t min = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next();
      if (r >= min) return r % n;
    }
  }

  // Uniform integer in [lo, hi], both inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return lo + int64_t(next_below(uint64_t(hi - lo) + 1));
  }

  // Uniform real in [lo, hi); returns lo for a zero-width interval.
  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  bool coin(double p) { return next_double() < p; }

  // Standard normal via Box-Muller. One value per call; the sine partner is
  // discarded so the draw count stays predictable.
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    // 1 - u1 keeps the log argument in (0, 1].
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(6.283185307179586477 * u2);
  }

private:
  uint64_t state_;
};

// Seed-derivation hash. The construction is a file-format contract (manifests
// record seeds produced by it, and replay depends on it), so it is fixed:
//   state <- 0x9e3779b97f4a7c15
//   per part: absorb(part byte length), then absorb each 8-byte little-endian
//             chunk of the part (final chunk zero-padded)
//   digest:   mix64(state ^ total byte count)
// where absorb(x) is state <- mix64(state ^ x), mix64 the SplitMix64
// finalizer. u64 arguments encode as 8 bytes little-endian, strings as raw
// bytes, doubles as the little-endian IEEE-754 bit pattern.
class Hash64 {
public:
  Hash64& add(uint64_t v) {
    absorb(8);
    absorb(v);
    total_ += 8;
    return *this;
  }

  Hash64& add(int v) { return add(uint64_t(int64_t(v))); }
  Hash64& add(int64_t v) { return add(uint64_t(v)); }

  Hash64& add(std::string_view s) {
    absorb(uint64_t(s.size()));
    size_t i = 0;
    for (; i + 8 <= s.size(); i += 8) absorb(load_le(s.data() + i, 8));
    if (i < s.size()) absorb(load_le(s.data() + i, s.size() - i));
    total_ += uint64_t(s.size());
    return *this;
  }

  Hash64& add(const char* s) { return add(std::string_view(s)); }

  Hash64& add(double v) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, 8);
    return add(bits);
  }

  uint64_t digest() const { return detail::mix64(state_ ^ total_); }

private:
  void absorb(uint64_t x) { state_ = detail::mix64(state_ ^ x); }

  static uint64_t load_le(const char* p, size_t n) {
    uint64_t v = 0;
    for (size_t i = 0; i < n; ++i) v |= uint64_t(uint8_t(p[i])) << (8 * i);
    return v;
  }

  uint64_t state_ = 0x9e3779b97f4a7c15ULL;
  uint64_t total_ = 0;
};

template <typename... Parts>
uint64_t hash64(Parts&&... parts) {
  Hash64 h;
  (h.add(parts), ...);
  return h.digest();
}

}  // namespace seedkit
