#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "twee/estimator.hpp"

namespace twee {

enum class Scenario { approx_cdf, covequal, cca, pcev, approx_cdf_shrunk };

std::string_view to_string(Scenario s) noexcept;
/// Throws ParseError on an unknown name.
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
    Scenario scenario = Scenario::approx_cdf;
    Index p = 200;  // dimension of the high-dimensional side
    Index q = 20;   // CCA projector dimension; PCEV covariate count is always 1
    Index n = 4;    // approx: degrees of freedom of B; others: sample size
    Index m = 96;   // approx: degrees of freedom of A
    double rho = 0.0;
    double r2 = 0.0;
    Index n_assoc = 50;  // PCEV responses carrying the signal
    std::size_t k = 100;
    std::size_t reps = 1000;  // approx: simulated roots; p-value study: simulations
    std::size_t n_perm = 500;
    std::uint64_t seed = 0;
    FitMethod fit_method = FitMethod::mm;
    std::size_t threads = 1;
};

/// Throws ValidationError on out-of-range parameters.
void validate(const ScenarioConfig& config);

/// A = sum_i Z_i^T Z_i with Z_i ~ N_p(0, Sigma), i = 1..df.
Matrix gen_wishart(Index p, Index df, const Matrix& sigma, Rng& rng);

/// Rows x p normal sample with AR(1) covariance rho^|i-j| (unit variances).
Matrix ar1_sample(Index rows, Index p, double rho, Rng& rng);

/// Problem data for the covequal, cca and pcev scenarios.
ProblemSpec gen_scenario_data(const ScenarioConfig& config, Rng& rng);

/// Pair of the approximation study: A ~ W_p(I, m), B ~ W_p(I, n) in factored
/// form, shrunk when the scenario asks for it.
DoubleWishartPair gen_approx_pair(const ScenarioConfig& config, Rng& rng);

/// Location and scale of the logit largest root in the non-singular case.
struct JohnstoneParams {
    double mu = 0.0;
    double sigma = 0.0;
};
JohnstoneParams johnstone_params(Index p, Index m, Index n);

/// sup |F(x) - F_n(x)| for an ascending sample.
double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf);

inline constexpr std::array<FitMethod, 4> kAllFitMethods{FitMethod::mm, FitMethod::mle, FitMethod::ad, FitMethod::adr};

struct ApproxStudy {
    std::vector<LargestRoot> roots;            // one per replicate
    std::vector<double> grid;                  // lambda scale
    std::vector<double> empirical;             // empirical CDF of the roots at grid
    std::array<std::vector<double>, 4> fitted; // fitted CDF per method at grid
    std::array<TWLocationScale, 4> fits;
    std::array<bool, 4> fit_fallback{};        // optimizer failed; MM estimate used
    std::array<double, 4> ks{};                // fitted CDF vs all replicates
    std::size_t excluded_roots = 0;
};

inline constexpr std::size_t kApproxGridPoints = 101;

/// Simulates config.reps largest roots, fits each method on a random
/// K-subsample and compares the fits to the empirical CDF.
ApproxStudy run_approx_study(const ScenarioConfig& config);

struct PValueRow {
    std::size_t sim = 0;
    double p_value_tw = 0.0;
    double p_value_perm = 0.0;
};

/// config.reps simulated datasets, each tested with K permutation roots for
/// the fit and n_perm roots for the reference permutation p-value.
std::vector<PValueRow> run_pvalue_study(const ScenarioConfig& config);

}  // namespace twee
