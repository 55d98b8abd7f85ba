#pragma once

// Data-parallel inner loops with a scalar reference implementation and
// ISA-specific variants. The active variant is picked once at startup from
// the CPU's capabilities and can be overridden (tests pin each variant and
// compare it against the scalar reference).

#include <cstddef>
#include <span>
#include <string_view>

namespace twee::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_squares)(const double* x, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

/// True when the variant was compiled in and the running CPU supports it.
bool supported(Isa isa) noexcept;

/// Best supported variant on this machine.
Isa detect() noexcept;

/// Kernel table for a specific variant; throws std::invalid_argument if unsupported.
const KernelTable& table(Isa isa);

/// Currently selected kernels (defaults to detect()).
const KernelTable& active() noexcept;

/// Select the variant used by active(). Not thread-safe with respect to
/// concurrent kernel calls; call before starting workers.
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double sum_squares(std::span<const double> x) {
    return active().sum_squares(x.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(TWEE_HAVE_AVX2)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(TWEE_HAVE_NEON)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace twee::simd
