#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "orbit/core.hpp"

namespace orbit {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for (seed, i, j, ...). Per-sample and per-epoch streams are
/// derived this way so results never depend on iteration or thread order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// d i.i.d. standard-normal draws.
Vector standard_normal_vector(Rng& rng, Eigen::Index d);

/// Fisher-Yates permutation of [0, n) driven by `seed`.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// 64-bit FNV-1a, stable across platforms; used for manifest and basis hashes.
std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace orbit
