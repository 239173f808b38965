#pragma once

#include <cstdint>
#include <random>

namespace ikalab {

// Deterministic generator. Both the engine and the range reduction are
// fully specified, so a (seed, stream) pair yields the same sequence on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Uniform integer in [lo, hi].
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

 private:
  std::mt19937_64 engine_;
};

// Stream tags used to split one scenario seed into independent generators.
namespace stream {
inline constexpr std::uint64_t kUserSecrets = 1;
inline constexpr std::uint64_t kRefreshSecrets = 2;
inline constexpr std::uint64_t kAttackerGhat = 3;
inline constexpr std::uint64_t kAttackerDecoys = 4;
inline constexpr std::uint64_t kAttackerExit = 5;
inline constexpr std::uint64_t kAttackerMitm = 6;
inline constexpr std::uint64_t kAttackerFiller = 7;
}  // namespace stream

}  // namespace ikalab
