#include <atomic>
#include <stdexcept>
#include <string>

#include "twee/simd/kernels.hpp"

namespace twee::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(TWEE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> current{&table(detect())};
    return current;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
        case Isa::neon:
#if defined(TWEE_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa detect() noexcept {
    if (supported(Isa::avx2)) return Isa::avx2;
    if (supported(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa)) {
        throw std::invalid_argument("SIMD variant not supported here: " + std::string(to_string(isa)));
    }
    switch (isa) {
#if defined(TWEE_HAVE_AVX2)
        case Isa::avx2: return detail::kAvx2Kernels;
#endif
#if defined(TWEE_HAVE_NEON)
        case Isa::neon: return detail::kNeonKernels;
#endif
        default: return detail::kScalarKernels;
    }
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void select(Isa isa) { slot().store(&table(isa), std::memory_order_release); }

}  // namespace twee::simd
