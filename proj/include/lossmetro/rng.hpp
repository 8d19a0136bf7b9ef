#pragma once

// Reproducible random streams. A stream is identified by (seed, stream id);
// its engine is seeded from a SplitMix64 hash of both so that streams used by
// different trials or threads never depend on scheduling order.

#include <cstdint>
#include <random>

namespace lossmetro {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

}  // namespace lossmetro
