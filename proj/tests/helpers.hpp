#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "twee/linalg.hpp"
#include "twee/random.hpp"

namespace testing {

inline twee::Matrix normal(twee::Rng& rng, twee::Index r, twee::Index c) {
    return twee::standard_normal_matrix(rng, r, c);
}

inline twee::DataMatrix data(twee::Matrix m) { return twee::DataMatrix(std::move(m)); }

/// Largest eigenvalue of (A + B)^{-1} B from a general (non-symmetric) eigensolver.
inline double direct_largest_root(const twee::Matrix& a, const twee::Matrix& b) {
    const twee::Matrix m = (a + b).lu().solve(b);
    Eigen::EigenSolver<twee::Matrix> es(m, false);
    double best = -1.0;
    for (twee::Index i = 0; i < es.eigenvalues().size(); ++i) best = std::max(best, es.eigenvalues()(i).real());
    return best;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace testing
