#include "twee/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twee/nelder_mead.hpp"

namespace twee {

RootSample RootSample::from_logits(std::vector<double> values, std::size_t excluded_count) {
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("root sample contains a non-finite value");
    }
    if (values.size() < 2) throw ValidationError("root sample needs at least 2 values");
    std::sort(values.begin(), values.end());
    return RootSample{std::move(values), excluded_count};
}

namespace {

constexpr double kClampLo = 1e-12;
constexpr double kClampHi = 1.0 - 1e-12;

double clamp_prob(double z) { return std::clamp(z, kClampLo, kClampHi); }

// z: ascending CDF values; w: matching upper-tail values 1 - z.
double ad_statistic(std::span<const double> z, std::span<const double> w) {
    const std::size_t k = z.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double coef = 2.0 * static_cast<double>(i + 1) - 1.0;
        acc += coef * (std::log(clamp_prob(z[i])) + std::log(clamp_prob(w[k - 1 - i])));
    }
    return -static_cast<double>(k) - acc / static_cast<double>(k);
}

double adr_statistic(std::span<const double> z, std::span<const double> w) {
    const std::size_t k = z.size();
    double sum_z = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sum_z += clamp_prob(z[i]);
        const double coef = 2.0 * static_cast<double>(i + 1) - 1.0;
        acc += coef * std::log(clamp_prob(w[k - 1 - i]));
    }
    return 0.5 * static_cast<double>(k) - 2.0 * sum_z - acc / static_cast<double>(k);
}

void require_size(const RootSample& sample, std::size_t minimum, const char* method) {
    if (sample.size() < minimum) {
        throw ValidationError(std::string(method) + " fit needs at least " + std::to_string(minimum) +
                              " roots, got " + std::to_string(sample.size()));
    }
}

/// Minimizes `objective(mu, sigma)` from the MM estimate over (mu, log sigma).
/// The initial simplex steps scale with sigma so the search is affine-equivariant.
template <class Objective>
TWLocationScale optimize_fit(const RootSample& sample, FitMethod method, Objective objective, bool maximize_report) {
    const TWLocationScale start = fit_mm(sample);
    auto f = [&](const std::array<double, 2>& x) { return objective(x[0], std::exp(x[1])); };
    const NelderMeadResult r = nelder_mead(f, {start.mu, std::log(start.sigma)}, {0.1 * start.sigma, 0.1});
    if (!r.converged) {
        throw FitFailure(std::string(to_string(method)) + " fit did not converge after " +
                             std::to_string(r.iterations) + " iterations",
                         start);
    }
    TWLocationScale out;
    out.mu = r.x[0];
    out.sigma = std::exp(r.x[1]);
    out.fit_method = method;
    out.sample_size = sample.size();
    out.objective_value = maximize_report ? -r.value : r.value;
    return out;
}

template <class Statistic>
auto gof_objective(const RootSample& sample, Statistic statistic) {
    return [&sample, statistic, z = std::vector<double>(sample.size()),
            w = std::vector<double>(sample.size())](double mu, double sigma) mutable {
        const auto& dist = TracyWidom1::standard();
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double s = (sample.logit_roots[i] - mu) / sigma;
            z[i] = dist.cdf(s);
            w[i] = dist.sf(s);
        }
        return statistic(z, w);
    };
}

}  // namespace

double anderson_darling(std::span<const double> z) {
    std::vector<double> w(z.size());
    std::transform(z.begin(), z.end(), w.begin(), [](double v) { return 1.0 - v; });
    return ad_statistic(z, w);
}

double anderson_darling_right(std::span<const double> z) {
    std::vector<double> w(z.size());
    std::transform(z.begin(), z.end(), w.begin(), [](double v) { return 1.0 - v; });
    return adr_statistic(z, w);
}

double tw_log_likelihood(const RootSample& sample, double mu, double sigma) {
    const auto& dist = TracyWidom1::standard();
    double ll = -static_cast<double>(sample.size()) * std::log(sigma);
    for (double x : sample.logit_roots) ll += std::log(std::max(dist.pdf((x - mu) / sigma), 1e-300));
    return ll;
}

TWLocationScale fit_mm(const RootSample& sample) {
    require_size(sample, 2, "mm");
    const auto& xs = sample.logit_roots;
    const double k = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double variance = ss / (k - 1.0);
    if (!(variance > 0.0)) throw DegenerateError("root sample has zero variance");
    const TWMoments m = tw_moments();
    TWLocationScale out;
    out.sigma = std::sqrt(variance / m.variance);
    out.mu = mean - out.sigma * m.mean;
    out.fit_method = FitMethod::mm;
    out.sample_size = xs.size();
    out.objective_value = 0.0;
    return out;
}

TWLocationScale fit_mle(const RootSample& sample) {
    require_size(sample, kMinFitSample, "mle");
    auto negative_ll = [&sample](double mu, double sigma) { return -tw_log_likelihood(sample, mu, sigma); };
    return optimize_fit(sample, FitMethod::mle, negative_ll, true);
}

TWLocationScale fit_ad(const RootSample& sample) {
    require_size(sample, kMinFitSample, "ad");
    return optimize_fit(sample, FitMethod::ad, gof_objective(sample, &ad_statistic), false);
}

TWLocationScale fit_adr(const RootSample& sample) {
    require_size(sample, kMinFitSample, "adr");
    return optimize_fit(sample, FitMethod::adr, gof_objective(sample, &adr_statistic), false);
}

TWLocationScale fit(const RootSample& sample, FitMethod method) {
    switch (method) {
        case FitMethod::mm: return fit_mm(sample);
        case FitMethod::mle: return fit_mle(sample);
        case FitMethod::ad: return fit_ad(sample);
        case FitMethod::adr: return fit_adr(sample);
    }
    throw ValidationError("unknown fit method");
}

}  // namespace twee
