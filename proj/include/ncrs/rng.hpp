#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace ncrs {

/// SplitMix64 finalizer. Used for seeding and for deriving stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a over a byte string.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream id for a role inside a run: mix64(fnv1a64(role) ^ mix64(run_index)).
/// Runs that share a master seed and a run index draw identical numbers for
/// the same role, whatever else differs in their configuration.
constexpr std::uint64_t stream_id(std::uint64_t run_index, std::string_view role) noexcept {
  return mix64(fnv1a64(role) ^ mix64(run_index));
}

/// Deterministic random stream keyed by (master_seed, stream_id).
///
/// xoshiro256** seeded through SplitMix64 from a combination of both keys.
/// Normal deviates use the Marsaglia polar method so the sequence does not
/// depend on the standard library's distribution implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream)
      : master_seed_(master_seed), stream_id_(stream) {
    std::uint64_t sm = mix64(master_seed) ^ mix64(stream ^ 0xd1b54a32d192ed03ULL);
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      word = mix64(sm);
    }
  }

  RngStream(std::uint64_t master_seed, std::uint64_t run_index, std::string_view role)
      : RngStream(master_seed, stream_id(run_index, role)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double prob) noexcept { return uniform() < prob; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  /// Independent child stream for a named role, keyed off this stream's keys.
  RngStream split(std::string_view role) const { return RngStream(master_seed_, stream_id(stream_id_, role)); }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t id() const noexcept { return stream_id_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ncrs
