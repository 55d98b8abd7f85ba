#pragma once

#include <cstdint>
#include <random>

#include "twee/linalg.hpp"

namespace twee {

using Rng = std::mt19937_64;

/// Independent stream for replicate `index` of the run seeded with `seed`.
/// `domain` separates unrelated uses of the same (seed, index) pair.
Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0);

/// Standard normal draw. Box-Muller on the generator's raw output, so the
/// sequence does not depend on the standard library's distribution code.
double standard_normal(Rng& rng);

/// rows x cols matrix of independent standard normals, filled row by row.
Matrix standard_normal_matrix(Rng& rng, Index rows, Index cols);

/// Uniform random permutation of 0..n-1 (Fisher-Yates driven by raw output).
std::vector<Index> random_permutation(Rng& rng, Index n);

/// Uniform integer in [0, bound) by rejection.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

}  // namespace twee
