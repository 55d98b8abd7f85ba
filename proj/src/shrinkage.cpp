#include "twee/shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "twee/error.hpp"

namespace twee {

namespace {

void finish(ShrinkageCoefficients& c) {
    c.d2_hat = std::max(c.d2_hat, 0.0);
    c.b2_bar = std::max(c.b2_bar, 0.0);
    c.b2_hat = std::min(c.b2_bar, c.d2_hat);
    c.a2_hat = c.d2_hat - c.b2_hat;
    if (c.d2_hat > 0.0) {
        c.intensity = std::clamp(c.b2_hat / c.d2_hat, 0.0, 1.0);
    } else {
        c.degenerate = true;
        c.intensity = 1.0;
    }
}

Matrix shrunk(const Matrix& s, const ShrinkageCoefficients& c) {
    Matrix out = (1.0 - c.intensity) * s;
    out.diagonal().array() += c.intensity * c.m_hat;
    return 0.5 * (out + out.transpose());
}

ShrinkageEstimate to_estimate(Matrix s_star, const ShrinkageCoefficients& c) {
    ShrinkageEstimate e;
    e.s_star = std::move(s_star);
    e.m_hat = c.m_hat;
    e.d2_hat = c.d2_hat;
    e.b2_hat = c.b2_hat;
    e.a2_hat = c.a2_hat;
    e.intensity = c.intensity;
    e.degenerate = c.degenerate;
    return e;
}

}  // namespace

ShrinkageCoefficients ledoit_wolf_from_gram(const Matrix& g, Index p) {
    const double n = static_cast<double>(g.rows());
    const double pd = static_cast<double>(p);
    const double g2 = g.squaredNorm();
    ShrinkageCoefficients c;
    c.m_hat = g.trace() / (n * pd);
    c.d2_hat = g2 / (n * n * pd) - c.m_hat * c.m_hat;
    c.b2_bar = (g.diagonal().squaredNorm() - g2 / n) / (n * n * pd);
    finish(c);
    return c;
}

ShrinkageCoefficients ledoit_wolf_reference(const Matrix& x) {
    const double n = static_cast<double>(x.rows());
    const Index p = x.cols();
    const double pd = static_cast<double>(p);
    const Matrix s = x.transpose() * x / n;
    ShrinkageCoefficients c;
    c.m_hat = s.trace() / pd;
    c.d2_hat = (s - c.m_hat * Matrix::Identity(p, p)).squaredNorm() / pd;
    double acc = 0.0;
    for (Index k = 0; k < x.rows(); ++k) {
        const Vector xk = x.row(k).transpose();
        acc += (xk * xk.transpose() - s).squaredNorm() / pd;
    }
    c.b2_bar = acc / (n * n);
    finish(c);
    return c;
}

ShrinkageEstimate shrink_from_moments(const Matrix& s, double b2_bar) {
    require_symmetric(s, "S");
    const double pd = static_cast<double>(s.rows());
    ShrinkageCoefficients c;
    c.m_hat = s.trace() / pd;
    c.d2_hat = (s - c.m_hat * Matrix::Identity(s.rows(), s.cols())).squaredNorm() / pd;
    c.b2_bar = b2_bar;
    finish(c);
    return to_estimate(shrunk(s, c), c);
}

ShrinkageEstimate ledoit_wolf(const DataMatrix& data, const LedoitWolfOptions& options) {
    const Matrix x = options.center ? data.centered().values() : data.values();
    const double n = static_cast<double>(x.rows());
    const Matrix s = x.transpose() * x / n;
    const ShrinkageCoefficients c =
        x.rows() < x.cols() ? ledoit_wolf_from_gram(x * x.transpose(), x.cols()) : ledoit_wolf_reference(x);
    return to_estimate(shrunk(s, c), c);
}

DoubleWishartPair build_shrunk_pair(const DoubleWishartPair& pair, const DataMatrix& data_for_a) {
    if (data_for_a.cols() != pair.dim()) {
        throw ValidationError("shrinkage data has " + std::to_string(data_for_a.cols()) + " columns, pair has dimension " +
                              std::to_string(pair.dim()));
    }
    const ShrinkageEstimate e = ledoit_wolf(data_for_a, {.center = false});
    const Matrix a_star = static_cast<double>(data_for_a.rows()) * e.s_star;
    return DoubleWishartPair::from_matrices(a_star, pair.b(), pair.meta(), pair.rank_tolerance());
}

DoubleWishartPair shrink_pair(const DoubleWishartPair& pair) {
    const FactorForm* f = pair.factor_form();
    if (f == nullptr || f->ridge != 0.0) {
        throw ValidationError("shrink_pair needs an unshrunk factored pair");
    }
    const Index rows = f->fa.rows();
    if (rows < 1) throw DegenerateError("A has no factor rows to shrink");
    const ShrinkageCoefficients c = ledoit_wolf_from_gram(f->a_scale * gram(f->fa), pair.dim());
    const double ridge = static_cast<double>(rows) * c.intensity * c.m_hat;
    return pair.with_shrunk_a(ridge, 1.0 - c.intensity);
}

}  // namespace twee
