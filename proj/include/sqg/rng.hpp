// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace sqg {

/// All stochastic code draws from a caller-owned mt19937_64.
using Rng = std::mt19937_64;

/// Named sub-streams derived from the single run seed. Each stream is
/// individually reproducible: re-deriving a stream with the same master
/// seed yields the same generator state regardless of what the other
/// streams consumed.
enum class Stream : std::uint64_t {
  data_sampling = 1,
  latent_training = 2,
  latent_generation = 3,
  init_discriminator = 4,
  init_generator = 5,
  shots = 6,
  shuffle = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a named sub-stream of `master`. Two rounds of splitmix64 keep
/// nearby master seeds and nearby stream ids decorrelated.
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream) {
  return splitmix64(splitmix64(master) ^
                    (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(stream)));
}

inline Rng make_stream(std::uint64_t master, Stream stream) {
  return Rng{derive_seed(master, stream)};
}

}  // namespace sqg
