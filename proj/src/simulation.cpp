#include "twee/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "twee/parallel.hpp"
#include "twee/shrinkage.hpp"

namespace twee {

namespace {

constexpr std::uint64_t kApproxDomain = 2;
constexpr std::uint64_t kSubsampleDomain = 3;
constexpr std::uint64_t kDataDomain = 4;
constexpr std::uint64_t kPermSeedDomain = 5;

constexpr std::array<std::string_view, 5> kScenarioNames{"approx_cdf", "covequal", "cca", "pcev",
                                                         "approx_cdf_shrunk"};

bool is_approx(Scenario s) { return s == Scenario::approx_cdf || s == Scenario::approx_cdf_shrunk; }

DataMatrix data(Matrix m) { return DataMatrix(std::move(m)); }

}  // namespace

std::string_view to_string(Scenario s) noexcept { return kScenarioNames[static_cast<std::size_t>(s)]; }

Scenario parse_scenario(const std::string& name) {
    for (std::size_t i = 0; i < kScenarioNames.size(); ++i) {
        if (kScenarioNames[i] == name) return static_cast<Scenario>(i);
    }
    throw ParseError("unknown scenario '" + name + "'");
}

void validate(const ScenarioConfig& c) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ValidationError(msg);
    };
    require(c.p >= 1, "p must be positive");
    require(c.rho >= 0.0 && c.rho < 1.0, "rho must lie in [0, 1)");
    require(c.r2 >= 0.0 && c.r2 < 1.0, "r2 must lie in [0, 1)");
    require(c.reps >= 1, "reps must be positive");
    require(c.k >= 2, "K must be at least 2");
    switch (c.scenario) {
        case Scenario::approx_cdf:
        case Scenario::approx_cdf_shrunk:
            require(c.m >= 1 && c.n >= 1, "m and n must be positive");
            require(c.reps >= 100, "the approximation study needs at least 100 replicates");
            require(c.k <= c.reps, "K cannot exceed reps");
            break;
        case Scenario::covequal:
            require(c.n >= 3, "n must be at least 3");
            break;
        case Scenario::cca:
            require(c.q >= 2, "q must be at least 2 (the association sits on the first two coordinates)");
            require(c.q + 1 < c.n, "q + 1 must be below n");
            break;
        case Scenario::pcev:
            require(c.n >= 4 && c.n % 2 == 0, "n must be even and at least 4 for a balanced binary covariate");
            require(c.n_assoc >= 0, "n_assoc must be non-negative");
            break;
    }
    if (!is_approx(c.scenario)) require(c.n_perm >= 1, "n_perm must be positive");
}

Matrix gen_wishart(Index p, Index df, const Matrix& sigma, Rng& rng) {
    if (df < 1) throw ValidationError("Wishart degrees of freedom must be at least 1");
    if (sigma.rows() != p || sigma.cols() != p) throw ValidationError("Sigma must be p x p");
    require_symmetric(sigma, "Sigma");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sigma + sigma.transpose()));
    const Vector ev = es.eigenvalues();
    const double top = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -1e-10 * std::max(top, 1.0)) throw ValidationError("Sigma is not positive semi-definite");
    const Matrix root = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    const Matrix z = standard_normal_matrix(rng, df, p) * root;
    return z.transpose() * z;
}

Matrix ar1_sample(Index rows, Index p, double rho, Rng& rng) {
    const double innovation = std::sqrt(1.0 - rho * rho);
    Matrix out(rows, p);
    for (Index i = 0; i < rows; ++i) {
        out(i, 0) = standard_normal(rng);
        for (Index j = 1; j < p; ++j) out(i, j) = rho * out(i, j - 1) + innovation * standard_normal(rng);
    }
    return out;
}

ProblemSpec gen_scenario_data(const ScenarioConfig& c, Rng& rng) {
    validate(c);
    switch (c.scenario) {
        case Scenario::covequal: {
            Matrix x = standard_normal_matrix(rng, c.n, c.p);
            Matrix y = ar1_sample(c.n, c.p, c.rho, rng);
            return CovEqualSpec{data(std::move(x)), data(std::move(y))};
        }
        case Scenario::cca: {
            // x is the high-dimensional side; Cov(x_i, y_i) = rho for i = 1, 2.
            Matrix y = standard_normal_matrix(rng, c.n, c.q);
            Matrix x = standard_normal_matrix(rng, c.n, c.p);
            const double e = std::sqrt(1.0 - c.rho * c.rho);
            for (Index j = 0; j < std::min<Index>(2, c.p); ++j) x.col(j) = c.rho * y.col(j) + e * x.col(j);
            return CcaSpec{data(std::move(x)), data(std::move(y))};
        }
        case Scenario::pcev: {
            Matrix x(c.n, 1);
            for (Index i = 0; i < c.n; ++i) x(i, 0) = i < c.n / 2 ? 0.0 : 1.0;
            Matrix y = standard_normal_matrix(rng, c.n, c.p);
            const double beta = std::sqrt(c.r2 / (1.0 - c.r2));
            const Index assoc = std::min(c.n_assoc, c.p);
            for (Index j = 0; j < assoc; ++j) y.col(j) += beta * x.col(0);
            return PcevSpec{data(std::move(y)), data(std::move(x)), std::nullopt};
        }
        default:
            throw ValidationError("scenario '" + std::string(to_string(c.scenario)) + "' does not produce problem data");
    }
}

DoubleWishartPair gen_approx_pair(const ScenarioConfig& c, Rng& rng) {
    RowMatrix za = standard_normal_matrix(rng, c.m, c.p);
    RowMatrix zb = standard_normal_matrix(rng, c.n, c.p);
    PairMeta meta{std::string(to_string(c.scenario)), static_cast<double>(c.m), static_cast<double>(c.n)};
    DoubleWishartPair pair = DoubleWishartPair::from_factors(std::move(za), std::move(zb), meta);
    if (c.scenario == Scenario::approx_cdf_shrunk) pair = shrink_pair(pair);
    return pair;
}

JohnstoneParams johnstone_params(Index p, Index m, Index n) {
    const double denom = static_cast<double>(m + n + 1);
    const double gamma = 2.0 * std::asin(std::sqrt((static_cast<double>(std::min(p, n)) - 0.5) / denom));
    const double phi = 2.0 * std::asin(std::sqrt((static_cast<double>(std::max(p, n)) - 0.5) / denom));
    JohnstoneParams out;
    out.mu = 2.0 * std::log(std::tan(0.5 * (phi + gamma)));
    const double s = std::sin(phi + gamma);
    out.sigma = std::cbrt(16.0 / (denom * denom) / (s * s * std::sin(phi) * std::sin(gamma)));
    return out;
}

double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double i_d = static_cast<double>(i);
        d = std::max({d, std::abs(f - (i_d + 1.0) / n), std::abs(f - i_d / n)});
    }
    return std::min(d, 1.0);
}

ApproxStudy run_approx_study(const ScenarioConfig& c) {
    validate(c);
    if (!is_approx(c.scenario)) throw ValidationError("run_approx_study needs an approx_cdf scenario");

    ApproxStudy out;
    out.roots.resize(c.reps);
    parallel_for(c.reps, c.threads, [&](std::size_t r) {
        Rng rng = make_stream(c.seed, r, kApproxDomain);
        out.roots[r] = largest_root(gen_approx_pair(c, rng));
    });

    Rng pick = make_stream(c.seed, 0, kSubsampleDomain);
    const auto order = random_permutation(pick, static_cast<Index>(c.reps));
    std::vector<LargestRoot> subsample;
    subsample.reserve(c.k);
    for (std::size_t i = 0; i < c.k; ++i) subsample.push_back(out.roots[static_cast<std::size_t>(order[i])]);
    const RootSample sample = fit_sample(subsample);
    out.excluded_roots = sample.excluded_count;

    std::vector<double> all_logits;
    std::vector<double> lambdas;
    for (const auto& r : out.roots) {
        all_logits.push_back(r.logit_lambda);
        lambdas.push_back(r.lambda);
    }
    std::sort(all_logits.begin(), all_logits.end());
    std::sort(lambdas.begin(), lambdas.end());

    for (std::size_t j = 0; j < kAllFitMethods.size(); ++j) {
        const FitMethod method = kAllFitMethods[j];
        if (method != FitMethod::mm && sample.size() < kMinFitSample) {
            out.fits[j] = fit_mm(sample);
            out.fit_fallback[j] = true;
        } else {
            try {
                out.fits[j] = fit(sample, method);
            } catch (const FitFailure& e) {
                out.fits[j] = e.fallback();
                out.fit_fallback[j] = true;
            }
        }
        const TWLocationScale& f = out.fits[j];
        out.ks[j] = ks_distance(all_logits, [&f](double x) { return f.cdf(x); });
    }

    const double lo = lambdas.front();
    const double hi = lambdas.back();
    for (std::size_t g = 0; g < kApproxGridPoints; ++g) {
        const double t = static_cast<double>(g) / static_cast<double>(kApproxGridPoints - 1);
        const double x = g + 1 == kApproxGridPoints ? hi : lo + t * (hi - lo);
        out.grid.push_back(x);
        const auto below = std::upper_bound(lambdas.begin(), lambdas.end(), x) - lambdas.begin();
        out.empirical.push_back(static_cast<double>(below) / static_cast<double>(lambdas.size()));
        const double logit = x <= 0.0 ? -std::numeric_limits<double>::infinity()
                             : x >= 1.0 ? std::numeric_limits<double>::infinity()
                                        : std::log(x / (1.0 - x));
        for (std::size_t j = 0; j < kAllFitMethods.size(); ++j) {
            const double v = std::isinf(logit) ? (logit > 0 ? 1.0 : 0.0) : out.fits[j].cdf(logit);
            out.fitted[j].push_back(v);
        }
    }
    return out;
}

std::vector<PValueRow> run_pvalue_study(const ScenarioConfig& c) {
    validate(c);
    if (is_approx(c.scenario)) throw ValidationError("run_pvalue_study needs a covequal, cca or pcev scenario");
    std::vector<PValueRow> rows(c.reps);
    parallel_for(c.reps, c.threads, [&](std::size_t s) {
        Rng data_rng = make_stream(c.seed, s, kDataDomain);
        const ProblemSpec spec = gen_scenario_data(c, data_rng);
        EstimatorOptions opts;
        opts.k = c.k;
        opts.fit_method = c.fit_method;
        opts.seed = make_stream(c.seed, s, kPermSeedDomain)();
        opts.n_perm = c.n_perm;
        opts.threads = 1;
        opts.fallback_to_mm = true;
        const TestResult r = run_estimator(spec, opts);
        rows[s] = PValueRow{s, r.p_value_tw, *r.p_value_perm};
    });
    return rows;
}

}  // namespace twee
