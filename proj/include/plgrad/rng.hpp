#pragma once

#include <cstdint>
#include <random>

namespace plgrad {

using RandomEngine = std::mt19937_64;

/// Identifies one random stream. Streams with different keys are
/// independent, and a stream never depends on which other streams were
/// drawn before it, so trials can run in any order.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t time = 0;
};

/// Purpose tags keep streams for different consumers apart even when they
/// share the (seed, trial, time) triple.
enum class StreamPurpose : std::uint32_t {
  gradient_noise = 1,
  problem_build = 2,
  sampling = 3,
  envelope_fit = 4,
};

inline RandomEngine make_engine(const StreamKey& key, StreamPurpose purpose) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(key.seed),  hi(key.seed), lo(key.trial), hi(key.trial),
                    lo(key.time),  hi(key.time), static_cast<std::uint32_t>(purpose)};
  return RandomEngine(seq);
}

}  // namespace plgrad
