#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "twee/fitting.hpp"
#include "twee/nelder_mead.hpp"

using namespace twee;

namespace {

/// Stratified TW(1) sample mapped to mu + sigma * s.
RootSample stratified(std::size_t k, double mu, double sigma) {
    std::vector<double> v;
    for (std::size_t i = 0; i < k; ++i) v.push_back(mu + sigma * tw_quantile((i + 0.5) / static_cast<double>(k)));
    return RootSample::from_logits(v);
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("Anderson-Darling statistics on a single point") {
    const double z[] = {0.5};
    CHECK(anderson_darling(z) == doctest::Approx(-1.0 + 2.0 * std::log(2.0)));
    CHECK(anderson_darling_right(z) == doctest::Approx(0.5 - 1.0 + std::log(2.0)));
}

TEST_CASE("Anderson-Darling against a direct double loop") {
    std::vector<double> z{0.03, 0.11, 0.2, 0.41, 0.42, 0.7, 0.93};
    const double k = static_cast<double>(z.size());
    double s = 0, sr = 0, sz = 0;
    for (std::size_t i = 1; i <= z.size(); ++i) {
        s += (2.0 * i - 1.0) * (std::log(z[i - 1]) + std::log(1.0 - z[z.size() - i]));
        sr += (2.0 * i - 1.0) * std::log(1.0 - z[z.size() - i]);
        sz += z[i - 1];
    }
    CHECK(anderson_darling(z) == doctest::Approx(-k - s / k).epsilon(1e-12));
    CHECK(anderson_darling_right(z) == doctest::Approx(k / 2.0 - 2.0 * sz - sr / k).epsilon(1e-12));
}

TEST_CASE("boundary values are clamped") {
    const double z[] = {0.0, 0.5, 1.0};
    CHECK(std::isfinite(anderson_darling(z)));
    CHECK(std::isfinite(anderson_darling_right(z)));
}

TEST_CASE("method of moments closed form") {
    const std::vector<double> x{-1.3, -1.1, -0.9, -1.0, -1.25};
    const RootSample s = RootSample::from_logits(x);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 5.0;
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / 4.0 / 1.6077810345810);
    const TWLocationScale f = fit_mm(s);
    CHECK(f.sigma == doctest::Approx(sigma).epsilon(1e-12));
    CHECK(f.mu == doctest::Approx(mean + 1.2065335745820 * sigma).epsilon(1e-12));
    CHECK(f.objective_value == 0.0);
    CHECK(f.sample_size == 5);
}

TEST_CASE("all methods recover the generating parameters") {
    const RootSample s = stratified(400, -1.0, 0.1);
    for (FitMethod m : {FitMethod::mm, FitMethod::mle, FitMethod::ad, FitMethod::adr}) {
        CAPTURE(to_string(m));
        const TWLocationScale f = fit(s, m);
        CHECK(f.fit_method == m);
        CHECK(std::abs(f.mu + 1.0) < 0.01);
        CHECK(std::abs(f.sigma / 0.1 - 1.0) < 0.03);
    }
}

TEST_CASE("MLE is a local maximum of the likelihood") {
    const RootSample s = stratified(60, 0.5, 2.0);
    const TWLocationScale f = fit_mle(s);
    const double best = tw_log_likelihood(s, f.mu, f.sigma);
    CHECK(f.objective_value == doctest::Approx(best));
    for (double dm : {-1e-2, 1e-2}) CHECK(tw_log_likelihood(s, f.mu + dm, f.sigma) <= best + 1e-6);
    for (double ds : {0.99, 1.01}) CHECK(tw_log_likelihood(s, f.mu, f.sigma * ds) <= best + 1e-6);
}

TEST_CASE("goodness-of-fit fits do not exceed the statistic at the moment start") {
    const RootSample s = stratified(30, 2.0, 0.5);
    const TWLocationScale mm = fit_mm(s);
    auto z_at = [&](const TWLocationScale& f) {
        std::vector<double> z;
        for (double x : s.logit_roots) z.push_back(f.cdf(x));
        return z;
    };
    CHECK(fit_ad(s).objective_value <= anderson_darling(z_at(mm)) + 1e-12);
    CHECK(fit_adr(s).objective_value <= anderson_darling_right(z_at(mm)) + 1e-12);
}

TEST_CASE("moment fit is affine equivariant") {
    const RootSample s = stratified(50, 0.0, 1.0);
    std::vector<double> y;
    for (double x : s.logit_roots) y.push_back(3.0 * x - 2.0);
    const TWLocationScale a = fit_mm(s);
    const TWLocationScale b = fit_mm(RootSample::from_logits(y));
    CHECK(b.mu == doctest::Approx(3.0 * a.mu - 2.0));
    CHECK(b.sigma == doctest::Approx(3.0 * a.sigma));
    const TWLocationScale c = fit_mle(s);
    const TWLocationScale d = fit_mle(RootSample::from_logits(y));
    CHECK(d.mu == doctest::Approx(3.0 * c.mu - 2.0).epsilon(1e-3));
    CHECK(d.sigma == doctest::Approx(3.0 * c.sigma).epsilon(1e-3));
}

TEST_CASE("sample size and input checks") {
    const RootSample nine = stratified(9, 0.0, 1.0);
    CHECK_NOTHROW(fit_mm(nine));
    CHECK_THROWS_AS(fit_mle(nine), ValidationError);
    CHECK_THROWS_AS(fit_ad(nine), ValidationError);
    CHECK_THROWS_AS(RootSample::from_logits({1.0}), ValidationError);
    CHECK_THROWS_AS(RootSample::from_logits({1.0, INFINITY}), ValidationError);
    CHECK_THROWS_AS(fit_mm(RootSample::from_logits({1.0, 1.0, 1.0})), DegenerateError);
}

TEST_CASE("fit failure carries the moment estimate") {
    TWLocationScale mm;
    mm.mu = 1.5;
    FitFailure e("did not converge", mm);
    CHECK(e.kind() == ErrorKind::fit_failure);
    CHECK(e.fallback().mu == 1.5);
}

TEST_CASE("Nelder-Mead on a quadratic and an iteration cap") {
    auto f = [](const std::array<double, 2>& x) { return (x[0] - 1) * (x[0] - 1) + 10 * (x[1] + 2) * (x[1] + 2); };
    const NelderMeadResult r = nelder_mead(f, {0, 0}, {0.5, 0.5});
    CHECK(r.converged);
    CHECK(std::abs(r.x[0] - 1) < 1e-5);
    CHECK(std::abs(r.x[1] + 2) < 1e-5);
    NelderMeadOptions capped;
    capped.max_iterations = 2;
    CHECK(!nelder_mead(f, {0, 0}, {0.5, 0.5}, capped).converged);
    auto nan_region = [&](const std::array<double, 2>& x) { return x[0] > 3 ? NAN : f(x); };
    CHECK(nelder_mead(nan_region, {0, 0}, {0.5, 0.5}).converged);
}

}
