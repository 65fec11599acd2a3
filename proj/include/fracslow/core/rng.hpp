#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace fracslow {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Mixes a master seed with an ordered list of labels into a child seed.
/// Adding new labels (paths, epsilons) never changes existing children.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t state = master;
  std::uint64_t out = detail::splitmix64(state);
  for (std::uint64_t label : labels) {
    state ^= label + 0x632BE59BD9B4E019ULL + (out << 6) + (out >> 2);
    out = detail::splitmix64(state);
  }
  return out;
}

inline std::uint64_t label_of(std::string_view name) noexcept { return detail::fnv1a(name); }

/// Independent generator for one (seed, stream) pair.
///
/// Streams are derived by hashing, so path k of an ensemble gets the same
/// numbers no matter which worker produces it or in which order.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = derive_seed(seed, {stream});
    std::array<std::uint32_t, 8> words{};
    for (std::size_t i = 0; i < words.size(); i += 2) {
      const std::uint64_t w = detail::splitmix64(state);
      words[i] = static_cast<std::uint32_t>(w);
      words[i + 1] = static_cast<std::uint32_t>(w >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace fracslow
