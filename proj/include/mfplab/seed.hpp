#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mfplab {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

using Rng = std::mt19937_64;

/// A node in a tree of deterministic random substreams.
///
/// Every stream is identified by its seed value alone; `derive(purpose, index)`
/// hashes (seed, purpose, index) into a child. Two streams derived with the same
/// path always produce the same sequence, independent of the order in which
/// siblings are consumed, so per-view or per-run work can be reordered or run
/// concurrently without changing results.
class SeedStream {
 public:
  constexpr SeedStream() = default;
  constexpr explicit SeedStream(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr SeedStream derive(std::string_view purpose, std::uint64_t index = 0) const noexcept {
    std::uint64_t h = detail::splitmix64(seed_ ^ detail::fnv1a(purpose));
    h = detail::splitmix64(h ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
    return SeedStream(h);
  }

  Rng engine() const { return Rng(seed_); }

  friend constexpr bool operator==(const SeedStream&, const SeedStream&) = default;

 private:
  std::uint64_t seed_ = 0;
};

}  // namespace mfplab
