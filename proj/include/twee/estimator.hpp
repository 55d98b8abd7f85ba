#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twee/fitting.hpp"
#include "twee/problems.hpp"

namespace twee {

struct EstimatorOptions {
    std::size_t k = 100;  // permutation roots used for the fit
    FitMethod fit_method = FitMethod::mm;
    std::uint64_t seed = 0;
    bool shrinkage = false;
    std::optional<std::size_t> n_perm;  // also compute the add-one permutation p-value
    std::size_t threads = 1;            // 0 = machine parallelism
    double rank_tolerance = kDefaultRankTolerance;
    bool fallback_to_mm = false;  // on FitFailure use the carried MM estimate
};

struct TestResult {
    double lambda_obs = 0.0;
    double logit_obs = 0.0;
    Index effective_rank = 0;
    double p_value_tw = 0.0;
    std::optional<double> p_value_perm;
    TWLocationScale fit;
    std::size_t k = 0;
    std::optional<std::size_t> n_perm_reference;
    std::uint64_t seed = 0;
    std::string problem_label;
    bool shrinkage_used = false;
    std::size_t excluded_roots = 0;
    bool fit_fallback = false;
};

/// Largest root of the (optionally shrunk) pair built from the spec.
LargestRoot observed_root(const ProblemSpec& spec, bool shrinkage, double rank_tolerance = kDefaultRankTolerance);

/// Largest roots of permutation replicates 0..count-1. Replicate k uses the
/// stream make_stream(seed, k), so the result does not depend on `threads`.
std::vector<LargestRoot> permutation_roots(const ProblemSpec& spec, std::size_t count, std::uint64_t seed,
                                           bool shrinkage, std::size_t threads,
                                           double rank_tolerance = kDefaultRankTolerance);

/// Fits a TW(1) location-scale law to the logits of the unclipped roots.
/// Throws DegenerateError when more than 20% of the roots are clipped.
RootSample fit_sample(const std::vector<LargestRoot>& roots);

/// Upper-tail probability of the observed logit under the fit, kept inside (0, 1).
double tw_pvalue(const TWLocationScale& fit, double logit_obs);

/// (1 + #{replicate >= observed}) / (n + 1), compared on the logit scale.
double permutation_pvalue(const std::vector<LargestRoot>& roots, const LargestRoot& observed);

/// Permutation p-value with its own n_perm replicates.
double permutation_pvalue(const ProblemSpec& spec, std::size_t n_perm, std::uint64_t seed, bool shrinkage = false,
                          std::size_t threads = 1, double rank_tolerance = kDefaultRankTolerance);

/// Tracy-Widom empirical estimator. When options.n_perm is set, the permutation
/// p-value reuses the same replicate lineage (the fit uses the first k roots).
TestResult run_estimator(const ProblemSpec& spec, const EstimatorOptions& options);

}  // namespace twee
