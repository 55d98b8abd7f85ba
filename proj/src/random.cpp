#include "twee/random.hpp"

#include <cmath>
#include <numbers>

namespace twee {

Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(domain), hi(domain)};
    return Rng(seq);
}

namespace {

// Uniform in (0, 1): 53 random bits offset by half an ulp, never 0 or 1.
double open_uniform(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

}  // namespace

double standard_normal(Rng& rng) {
    const double u1 = open_uniform(rng);
    const double u2 = open_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix standard_normal_matrix(Rng& rng, Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) out(i, j) = standard_normal(rng);
    }
    return out;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

std::vector<Index> random_permutation(Rng& rng, Index n) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    return order;
}

}  // namespace twee
