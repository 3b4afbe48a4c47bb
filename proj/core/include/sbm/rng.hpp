#pragma once

#include <cstdint>
#include <random>

namespace sbm {

// splitmix64 finaliser; used to derive independent per-replicate streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of replicate `index` in stream `stream` under a master seed. Depends
// only on its arguments, so results do not depend on worker scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

using Engine = std::mt19937_64;

}  // namespace sbm
