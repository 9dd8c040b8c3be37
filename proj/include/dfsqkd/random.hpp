#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace dfsqkd {

/// Anything that can select an index from a list of non-negative weights.
/// Measurements and every random decision of the eavesdropper go through
/// this, so the same code runs both sampled and exhaustively enumerated.
template <class C>
concept Chooser = requires(C& c, std::span<const double> weights) {
  { c.pick(weights) } -> std::convertible_to<std::size_t>;
};

/// A Chooser that can also produce continuous uniform draws.
template <class R>
concept RandomSource = Chooser<R> && requires(R& r) {
  { r.uniform() } -> std::convertible_to<double>;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Seeded xoshiro256** generator. The bit stream and the mapping to doubles
/// are fixed here rather than delegated to <random> distributions, whose
/// algorithms differ between standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  /// Independent generator for a named sub-stream of a seed.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed ^ (0xd1b54a32d192ed03ULL * (stream_id + 1));
    return Rng(detail::splitmix64(sm));
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::size_t below(std::size_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: empty range");
    return static_cast<std::size_t>(uniform() * static_cast<double>(bound));
  }

  bool coin() { return (next() >> 63) != 0; }

  /// Inverse-CDF selection with exactly one uniform draw. Zero-weight entries
  /// are never returned.
  std::size_t pick(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("Rng::pick: no positive weight");
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (u < acc) return i;
    }
    return last_positive;
  }

 private:
  std::uint64_t state_[4]{};
};

static_assert(RandomSource<Rng>);

}  // namespace dfsqkd
