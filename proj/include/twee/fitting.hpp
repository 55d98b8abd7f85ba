#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "twee/error.hpp"
#include "twee/tracy_widom.hpp"

namespace twee {

/// Logit-scale largest roots from permutation replicates, sorted ascending.
struct RootSample {
    std::vector<double> logit_roots;
    std::size_t excluded_count = 0;  // clipped roots dropped upstream

    /// Sorts the values; throws ValidationError on non-finite entries or fewer than 2 values.
    static RootSample from_logits(std::vector<double> values, std::size_t excluded_count = 0);

    std::size_t size() const noexcept { return logit_roots.size(); }
};

/// Smallest sample accepted by the optimized fits (MLE, AD, ADR).
inline constexpr std::size_t kMinFitSample = 10;

/// An optimized fit did not converge; carries the method-of-moments estimate.
class FitFailure : public Error {
public:
    FitFailure(const std::string& what, TWLocationScale fallback)
        : Error(ErrorKind::fit_failure, what), fallback_(fallback) {}
    const TWLocationScale& fallback() const noexcept { return fallback_; }

private:
    TWLocationScale fallback_;
};

TWLocationScale fit_mm(const RootSample& sample);
TWLocationScale fit_mle(const RootSample& sample);
TWLocationScale fit_ad(const RootSample& sample);
TWLocationScale fit_adr(const RootSample& sample);
TWLocationScale fit(const RootSample& sample, FitMethod method);

/// Anderson-Darling statistic of ascending CDF values z (clamped to [1e-12, 1 - 1e-12]).
double anderson_darling(std::span<const double> z);
/// Right-tail weighted variant: K/2 - 2 sum z_i - (1/K) sum (2i-1) ln(1 - z_{K+1-i}).
double anderson_darling_right(std::span<const double> z);

/// Log-likelihood of the sample under sigma * TW(1) + mu.
double tw_log_likelihood(const RootSample& sample, double mu, double sigma);

}  // namespace twee
