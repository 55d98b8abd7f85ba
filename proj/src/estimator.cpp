#include "twee/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twee/parallel.hpp"
#include "twee/shrinkage.hpp"

namespace twee {

namespace {

constexpr std::uint64_t kPermutationDomain = 1;

LargestRoot root_of(const ProblemSpec& spec, bool shrinkage, double rank_tolerance) {
    DoubleWishartPair pair = build_pair(spec, rank_tolerance);
    if (shrinkage) pair = shrink_pair(pair);
    return largest_root(pair);
}

}  // namespace

LargestRoot observed_root(const ProblemSpec& spec, bool shrinkage, double rank_tolerance) {
    return root_of(spec, shrinkage, rank_tolerance);
}

std::vector<LargestRoot> permutation_roots(const ProblemSpec& spec, std::size_t count, std::uint64_t seed,
                                           bool shrinkage, std::size_t threads, double rank_tolerance) {
    std::vector<LargestRoot> roots(count);
    parallel_for(count, threads, [&](std::size_t k) {
        Rng rng = make_stream(seed, k, kPermutationDomain);
        roots[k] = root_of(permute(spec, rng), shrinkage, rank_tolerance);
    });
    return roots;
}

RootSample fit_sample(const std::vector<LargestRoot>& roots) {
    std::vector<double> logits;
    logits.reserve(roots.size());
    for (const auto& r : roots) {
        if (!r.clipped) logits.push_back(r.logit_lambda);
    }
    const std::size_t excluded = roots.size() - logits.size();
    if (5 * excluded > roots.size()) {
        throw DegenerateError(std::to_string(excluded) + " of " + std::to_string(roots.size()) +
                              " permutation roots are at the 0/1 boundary; check the problem rank and --rank-tol");
    }
    return RootSample::from_logits(std::move(logits), excluded);
}

double tw_pvalue(const TWLocationScale& fit, double logit_obs) {
    const double p = fit.sf(logit_obs);
    return std::clamp(p, std::numeric_limits<double>::min(), 1.0 - std::numeric_limits<double>::epsilon() / 2);
}

double permutation_pvalue(const std::vector<LargestRoot>& roots, const LargestRoot& observed) {
    if (roots.empty()) throw ValidationError("permutation p-value needs at least one replicate");
    const auto hits = std::count_if(roots.begin(), roots.end(),
                                    [&](const LargestRoot& r) { return r.logit_lambda >= observed.logit_lambda; });
    return (1.0 + static_cast<double>(hits)) / (static_cast<double>(roots.size()) + 1.0);
}

double permutation_pvalue(const ProblemSpec& spec, std::size_t n_perm, std::uint64_t seed, bool shrinkage,
                          std::size_t threads, double rank_tolerance) {
    if (n_perm < 1) throw ValidationError("n_perm must be at least 1");
    const LargestRoot obs = observed_root(spec, shrinkage, rank_tolerance);
    return permutation_pvalue(permutation_roots(spec, n_perm, seed, shrinkage, threads, rank_tolerance), obs);
}

TestResult run_estimator(const ProblemSpec& spec, const EstimatorOptions& options) {
    const std::size_t minimum = options.fit_method == FitMethod::mm ? 2 : kMinFitSample;
    if (options.k < minimum) {
        throw ValidationError("K must be at least " + std::to_string(minimum) + " for " +
                              std::string(to_string(options.fit_method)));
    }
    if (options.n_perm && *options.n_perm < 1) throw ValidationError("n_perm must be at least 1");
    validate(spec);

    const LargestRoot obs = observed_root(spec, options.shrinkage, options.rank_tolerance);
    const std::size_t count = std::max(options.k, options.n_perm.value_or(0));
    const auto roots =
        permutation_roots(spec, count, options.seed, options.shrinkage, options.threads, options.rank_tolerance);

    TestResult out;
    out.lambda_obs = obs.lambda;
    out.logit_obs = obs.logit_lambda;
    out.effective_rank = obs.effective_rank;
    out.k = options.k;
    out.seed = options.seed;
    out.problem_label = problem_name(spec);
    out.shrinkage_used = options.shrinkage;

    const std::vector<LargestRoot> fit_roots(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(options.k));
    const RootSample sample = fit_sample(fit_roots);
    out.excluded_roots = sample.excluded_count;
    try {
        out.fit = fit(sample, options.fit_method);
    } catch (const FitFailure& e) {
        if (!options.fallback_to_mm) throw;
        out.fit = e.fallback();
        out.fit_fallback = true;
    }
    out.p_value_tw = tw_pvalue(out.fit, out.logit_obs);

    if (options.n_perm) {
        const std::vector<LargestRoot> perm_roots(roots.begin(),
                                                  roots.begin() + static_cast<std::ptrdiff_t>(*options.n_perm));
        out.p_value_perm = permutation_pvalue(perm_roots, obs);
        out.n_perm_reference = *options.n_perm;
    }
    return out;
}

}  // namespace twee
