#pragma once

#include <array>
#include <cstddef>
#include <functional>

namespace twee {

struct NelderMeadOptions {
    double f_tolerance = 1e-6;  // spread of objective values across the simplex
    double x_tolerance = 1e-6;  // simplex extent, in units of the initial steps
    std::size_t max_iterations = 500;
};

struct NelderMeadResult {
    std::array<double, 2> x{};
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Deterministic two-parameter Nelder-Mead (standard coefficients 1, 2, 1/2, 1/2).
/// The initial simplex is {x0, x0 + step0 e0, x0 + step1 e1}. Non-finite
/// objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 2>&)>& objective,
                             std::array<double, 2> x0, std::array<double, 2> steps,
                             const NelderMeadOptions& options = {});

}  // namespace twee
