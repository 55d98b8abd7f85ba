#include "twee/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twee {

NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 2>&)>& objective,
                             std::array<double, 2> x0, std::array<double, 2> steps,
                             const NelderMeadOptions& options) {
    using Point = std::array<double, 2>;
    auto eval = [&](const Point& p) {
        const double v = objective(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::array<Point, 3> pts{x0, x0, x0};
    pts[1][0] += steps[0];
    pts[2][1] += steps[1];
    std::array<double, 3> vals{eval(pts[0]), eval(pts[1]), eval(pts[2])};

    auto combine = [](const Point& a, const Point& b, double t) {
        // a + t (b - a)
        return Point{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
    };

    NelderMeadResult result;
    for (std::size_t iter = 0;; ++iter) {
        std::array<std::size_t, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return vals[i] < vals[j]; });
        pts = {pts[order[0]], pts[order[1]], pts[order[2]]};
        vals = {vals[order[0]], vals[order[1]], vals[order[2]]};

        double extent = 0.0;
        for (std::size_t i = 1; i < 3; ++i) {
            for (std::size_t d = 0; d < 2; ++d) {
                extent = std::max(extent, std::abs(pts[i][d] - pts[0][d]) / std::abs(steps[d]));
            }
        }
        const bool flat = std::isfinite(vals[2]) && vals[2] - vals[0] <= options.f_tolerance;
        if (flat && extent <= options.x_tolerance) {
            result.converged = true;
            result.iterations = iter;
            break;
        }
        if (iter >= options.max_iterations) {
            result.iterations = iter;
            break;
        }

        const Point centroid{0.5 * (pts[0][0] + pts[1][0]), 0.5 * (pts[0][1] + pts[1][1])};
        const Point reflected = combine(centroid, pts[2], -1.0);
        const double fr = eval(reflected);
        if (fr < vals[0]) {
            const Point expanded = combine(centroid, pts[2], -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if (fr < vals[1]) {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        const bool outside = fr < vals[2];
        const Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, pts[2], 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : vals[2])) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        for (std::size_t i = 1; i < 3; ++i) {
            pts[i] = combine(pts[0], pts[i], 0.5);
            vals[i] = eval(pts[i]);
        }
    }
    result.x = pts[0];
    result.value = vals[0];
    return result;
}

}  // namespace twee
