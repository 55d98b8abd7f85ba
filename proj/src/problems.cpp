#include "twee/problems.hpp"

#include <cmath>
#include <map>

#include "twee/error.hpp"

namespace twee {

namespace {

/// Orthonormal contrasts of the rows: H x with H^T H = I - 11^T/n.
/// Row j-1 is (x_0 + ... + x_{j-1} - j x_j) / sqrt(j (j + 1)).
RowMatrix helmert_rows(const Matrix& x) {
    const Index n = x.rows();
    RowMatrix out(std::max<Index>(n - 1, 0), x.cols());
    Eigen::RowVectorXd running = x.row(0);
    for (Index j = 1; j < n; ++j) {
        const double jd = static_cast<double>(j);
        out.row(j - 1) = (running - jd * x.row(j)) / std::sqrt(jd * (jd + 1.0));
        running += x.row(j);
    }
    return out;
}

void require_same_rows(const DataMatrix& a, const DataMatrix& b, const char* what) {
    if (a.rows() != b.rows()) {
        throw ValidationError(std::string(what) + ": row counts differ (" + std::to_string(a.rows()) + " vs " +
                              std::to_string(b.rows()) + ")");
    }
}

/// Rows of Q^T y for the Householder QR of `design`. Throws when a design
/// column is numerically dependent on the ones before it.
struct Projected {
    Matrix qty;
    Index design_cols = 0;
};

Projected project_on_design(const Matrix& design, const std::vector<std::string>& names, const Matrix& y) {
    Eigen::HouseholderQR<Matrix> qr(design);
    const Matrix& r = qr.matrixQR();
    std::string bad;
    for (Index j = 0; j < design.cols(); ++j) {
        const double scale = design.col(j).norm();
        if (!(std::abs(r(j, j)) > 1e-10 * std::max(scale, 1e-300))) {
            bad += (bad.empty() ? "" : ", ") + names[static_cast<std::size_t>(j)];
        }
    }
    if (!bad.empty()) throw ValidationError("design is rank-deficient; dependent columns: " + bad);
    Projected out;
    out.qty = y;
    out.qty.applyOnTheLeft(qr.householderQ().adjoint());
    out.design_cols = design.cols();
    return out;
}

std::vector<std::string> prefixed(const std::string& prefix, const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(prefix + l);
    return out;
}

/// Returns true when spec.y is the projector side, false when spec.x is.
bool cca_y_projects(const CcaSpec& spec) {
    const Index n = spec.x.rows();
    if (spec.y.cols() + 1 < n) return true;
    if (spec.x.cols() + 1 < n) return false;
    throw ValidationError("cca: neither side has fewer than n - 1 columns (n = " + std::to_string(n) + ")");
}

RowMatrix row_block(const Matrix& m, Index begin, Index count) { return m.middleRows(begin, count); }

}  // namespace

void validate(const ManovaSpec& spec) {
    if (static_cast<Index>(spec.groups.size()) != spec.y.rows()) {
        throw ValidationError("manova: " + std::to_string(spec.groups.size()) + " group labels for " +
                              std::to_string(spec.y.rows()) + " rows");
    }
    std::map<std::string, Index> counts;
    for (const auto& g : spec.groups) ++counts[g];
    if (counts.size() < 2) throw ValidationError("manova: at least 2 groups are required");
    for (const auto& [label, count] : counts) {
        if (count < 2) throw ValidationError("manova: group '" + label + "' has fewer than 2 members");
    }
}

void validate(const CovEqualSpec& spec) {
    if (spec.x.cols() != spec.y.cols()) {
        throw ValidationError("covequal: column counts differ (" + std::to_string(spec.x.cols()) + " vs " +
                              std::to_string(spec.y.cols()) + ")");
    }
}

void validate(const CcaSpec& spec) {
    require_same_rows(spec.x, spec.y, "cca");
    cca_y_projects(spec);
}

void validate(const PcevSpec& spec) {
    require_same_rows(spec.y, spec.x, "pcev");
    Index c = 0;
    if (spec.confounders) {
        require_same_rows(spec.y, *spec.confounders, "pcev confounders");
        c = spec.confounders->cols();
    }
    if (!(spec.x.cols() + c + 1 < spec.y.rows())) {
        throw ValidationError("pcev: q + c + 1 must be below n");
    }
}

void validate(const ProblemSpec& spec) {
    std::visit([](const auto& s) { validate(s); }, spec);
}

DoubleWishartPair build_manova(const ManovaSpec& spec, double rank_tolerance) {
    validate(spec);
    const Matrix& y = spec.y.values();
    // Groups in order of first appearance.
    std::map<std::string, std::size_t> slot;
    std::vector<std::vector<Index>> members;
    for (Index i = 0; i < y.rows(); ++i) {
        auto [it, inserted] = slot.try_emplace(spec.groups[static_cast<std::size_t>(i)], members.size());
        if (inserted) members.emplace_back();
        members[it->second].push_back(i);
    }
    const Index n = y.rows();
    const auto k = static_cast<Index>(members.size());
    const Eigen::RowVectorXd grand = y.colwise().mean();
    RowMatrix fa(n - k, y.cols());
    RowMatrix fb(k, y.cols());
    Index at = 0;
    for (Index g = 0; g < k; ++g) {
        const auto& idx = members[static_cast<std::size_t>(g)];
        Matrix block(static_cast<Index>(idx.size()), y.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) block.row(static_cast<Index>(r)) = y.row(idx[r]);
        const RowMatrix h = helmert_rows(block);
        fa.middleRows(at, h.rows()) = h;
        at += h.rows();
        const double ng = static_cast<double>(idx.size());
        fb.row(g) = std::sqrt(ng) * (block.colwise().mean() - grand);
    }
    PairMeta meta{"manova", static_cast<double>(n - k), static_cast<double>(k - 1)};
    return DoubleWishartPair::from_factors(std::move(fa), std::move(fb), meta, rank_tolerance);
}

DoubleWishartPair build_covequal(const CovEqualSpec& spec, double rank_tolerance) {
    validate(spec);
    auto factor = [](const DataMatrix& d) {
        const double rows = static_cast<double>(d.rows());
        return RowMatrix(std::sqrt((rows - 1.0) / rows) * helmert_rows(d.values()));
    };
    PairMeta meta{"covequal", static_cast<double>(spec.x.rows() - 1), static_cast<double>(spec.y.rows() - 1)};
    return DoubleWishartPair::from_factors(factor(spec.x), factor(spec.y), meta, rank_tolerance);
}

DoubleWishartPair build_cca(const CcaSpec& spec, double rank_tolerance) {
    validate(spec);
    const bool y_projects = cca_y_projects(spec);
    const DataMatrix& proj = y_projects ? spec.y : spec.x;
    const DataMatrix& resp = y_projects ? spec.x : spec.y;
    const Index n = proj.rows();
    const Index pl = proj.cols();

    Matrix design(n, pl + 1);
    design.col(0).setOnes();
    design.rightCols(pl) = proj.values();
    std::vector<std::string> names{"(intercept)"};
    for (const auto& l : proj.labels()) names.push_back(l);
    const Projected pr = project_on_design(design, names, resp.values());

    PairMeta meta{"cca", static_cast<double>(n - 1 - pl), static_cast<double>(pl)};
    return DoubleWishartPair::from_factors(row_block(pr.qty, pl + 1, n - pl - 1), row_block(pr.qty, 1, pl), meta,
                                           rank_tolerance);
}

DoubleWishartPair build_pcev(const PcevSpec& spec, double rank_tolerance) {
    validate(spec);
    const Index n = spec.y.rows();
    const Index q = spec.x.cols();
    const Index c = spec.confounders ? spec.confounders->cols() : 0;

    Matrix design(n, 1 + c + q);
    design.col(0).setOnes();
    std::vector<std::string> names{"(intercept)"};
    if (spec.confounders) {
        design.middleCols(1, c) = spec.confounders->values();
        for (const auto& l : prefixed("confounder ", spec.confounders->labels())) names.push_back(l);
    }
    design.rightCols(q) = spec.x.values();
    for (const auto& l : prefixed("covariate ", spec.x.labels())) names.push_back(l);
    const Projected pr = project_on_design(design, names, spec.y.values());

    PairMeta meta{"pcev", static_cast<double>(n - 1 - c - q), static_cast<double>(q)};
    return DoubleWishartPair::from_factors(row_block(pr.qty, 1 + c + q, n - 1 - c - q), row_block(pr.qty, 1 + c, q),
                                           meta, rank_tolerance);
}

DoubleWishartPair build_pair(const ProblemSpec& spec, double rank_tolerance) {
    return std::visit(
        [&](const auto& s) -> DoubleWishartPair {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ManovaSpec>) return build_manova(s, rank_tolerance);
            if constexpr (std::is_same_v<T, CovEqualSpec>) return build_covequal(s, rank_tolerance);
            if constexpr (std::is_same_v<T, CcaSpec>) return build_cca(s, rank_tolerance);
            if constexpr (std::is_same_v<T, PcevSpec>) return build_pcev(s, rank_tolerance);
        },
        spec);
}

ManovaSpec permute(const ManovaSpec& spec, Rng& rng) {
    const auto order = random_permutation(rng, static_cast<Index>(spec.groups.size()));
    ManovaSpec out{spec.y, {}};
    out.groups.reserve(order.size());
    for (Index i : order) out.groups.push_back(spec.groups[static_cast<std::size_t>(i)]);
    return out;
}

CovEqualSpec permute(const CovEqualSpec& spec, Rng& rng) {
    const Index n1 = spec.x.rows();
    const Index n2 = spec.y.rows();
    Matrix pooled(n1 + n2, spec.x.cols());
    pooled.topRows(n1) = spec.x.centered().values();
    pooled.bottomRows(n2) = spec.y.centered().values();
    const auto order = random_permutation(rng, n1 + n2);
    Matrix x(n1, pooled.cols());
    Matrix y(n2, pooled.cols());
    for (Index i = 0; i < n1; ++i) x.row(i) = pooled.row(order[static_cast<std::size_t>(i)]);
    for (Index i = 0; i < n2; ++i) y.row(i) = pooled.row(order[static_cast<std::size_t>(n1 + i)]);
    return CovEqualSpec{DataMatrix(std::move(x), spec.x.labels()), DataMatrix(std::move(y), spec.y.labels())};
}

CcaSpec permute(const CcaSpec& spec, Rng& rng) {
    return CcaSpec{spec.x.select_rows(random_permutation(rng, spec.x.rows())), spec.y};
}

PcevSpec permute(const PcevSpec& spec, Rng& rng) {
    return PcevSpec{spec.y.select_rows(random_permutation(rng, spec.y.rows())), spec.x, spec.confounders};
}

ProblemSpec permute(const ProblemSpec& spec, Rng& rng) {
    return std::visit([&](const auto& s) -> ProblemSpec { return permute(s, rng); }, spec);
}

const char* problem_name(const ProblemSpec& spec) {
    static constexpr const char* names[] = {"manova", "covequal", "cca", "pcev"};
    return names[spec.index()];
}

double explained_variance_ratio(const DoubleWishartPair& pair, const Vector& w) {
    const Matrix a = pair.a();
    const Matrix b = pair.b();
    const double num = w.dot(b * w);
    return num / (w.dot(a * w) + num);
}

PcevComponent pcev_component_and_vif(const PcevSpec& spec, const DoubleWishartPair& pair) {
    validate(spec);
    const Index n = spec.y.rows();
    const Index p = spec.y.cols();
    if (pair.dim() != p) throw ValidationError("pcev component: pair dimension does not match the responses");

    // Responses with intercept and confounders projected out.
    Matrix adjusted;
    {
        const Index c = spec.confounders ? spec.confounders->cols() : 0;
        Matrix base(n, 1 + c);
        base.col(0).setOnes();
        if (spec.confounders) base.rightCols(c) = spec.confounders->values();
        Eigen::HouseholderQR<Matrix> qr(base);
        adjusted = spec.y.values() - base * qr.solve(spec.y.values());
    }

    PcevComponent out;
    out.weights = leading_direction(pair);
    out.scores = adjusted * out.weights;
    out.vif = Vector::Zero(p);
    out.zero_variance.assign(static_cast<std::size_t>(p), false);
    const Vector s = out.scores.array() - out.scores.mean();
    const double s_norm = s.norm();
    for (Index j = 0; j < p; ++j) {
        const Vector col = adjusted.col(j).array() - adjusted.col(j).mean();
        const double c_norm = col.norm();
        if (!(c_norm > 1e-12 * std::max(1.0, adjusted.col(j).cwiseAbs().maxCoeff())) || !(s_norm > 0.0)) {
            out.zero_variance[static_cast<std::size_t>(j)] = true;
            continue;
        }
        out.vif(j) = std::clamp(col.dot(s) / (c_norm * s_norm), -1.0, 1.0);
    }
    return out;
}

}  // namespace twee
