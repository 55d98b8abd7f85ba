#include "twee/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twee/error.hpp"
#include "twee/simd/kernels.hpp"

namespace twee {

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
    if (values_.rows() < 2) throw ValidationError("data matrix needs at least 2 rows");
    if (values_.cols() < 1) throw ValidationError("data matrix needs at least 1 column");
    if (!values_.allFinite()) {
        for (Index j = 0; j < values_.cols(); ++j) {
            for (Index i = 0; i < values_.rows(); ++i) {
                if (!std::isfinite(values_(i, j))) {
                    std::ostringstream msg;
                    msg << "non-finite value at row " << i + 1 << ", column " << j + 1;
                    throw ValidationError(msg.str());
                }
            }
        }
    }
    if (labels_.empty()) {
        labels_.reserve(static_cast<std::size_t>(values_.cols()));
        for (Index j = 0; j < values_.cols(); ++j) labels_.push_back("v" + std::to_string(j + 1));
    } else if (static_cast<Index>(labels_.size()) != values_.cols()) {
        throw ValidationError("column label count does not match column count");
    }
}

DataMatrix DataMatrix::select_rows(const std::vector<Index>& order) const {
    Matrix out(static_cast<Index>(order.size()), values_.cols());
    for (std::size_t i = 0; i < order.size(); ++i) out.row(static_cast<Index>(i)) = values_.row(order[i]);
    return DataMatrix(std::move(out), labels_);
}

Vector DataMatrix::column_means() const { return values_.colwise().mean().transpose(); }

DataMatrix DataMatrix::centered() const {
    Matrix out = values_.rowwise() - values_.colwise().mean();
    return DataMatrix(std::move(out), labels_);
}

void require_symmetric(const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) throw ValidationError(std::string(name) + " is not square");
    const double scale = m.cwiseAbs().maxCoeff();
    if (m.size() == 0 || scale == 0.0) return;
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        std::ostringstream msg;
        msg << name << " is not symmetric (max asymmetry " << asym << " relative to " << scale << ")";
        throw ValidationError(msg.str());
    }
}

namespace {

void require_tolerance(double tol) {
    if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("rank tolerance must lie in (0, 1)");
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

DoubleWishartPair::DoubleWishartPair(std::variant<DenseForm, FactorForm> form, PairMeta meta,
                                     double rank_tolerance)
    : form_(std::move(form)), meta_(std::move(meta)), rank_tolerance_(rank_tolerance) {}

DoubleWishartPair DoubleWishartPair::from_matrices(const Matrix& a, const Matrix& b, PairMeta meta,
                                                   double rank_tolerance) {
    require_tolerance(rank_tolerance);
    require_symmetric(a, "A");
    require_symmetric(b, "B");
    if (a.rows() != b.rows()) throw ValidationError("A and B differ in dimension");
    if (a.rows() < 1) throw ValidationError("A and B must be at least 1 x 1");
    if (!a.allFinite() || !b.allFinite()) throw ValidationError("A or B has non-finite entries");
    DenseForm form{symmetrized(a), symmetrized(b)};

    using Solver = Eigen::SelfAdjointEigenSolver<Matrix>;
    const double top = Solver(form.a + form.b, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double floor = -rank_tolerance * std::max(top, 0.0);
    if (Solver(form.a, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < floor) {
        throw ValidationError("A is not positive semi-definite");
    }
    if (Solver(form.b, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < floor) {
        throw ValidationError("B is not positive semi-definite");
    }
    return DoubleWishartPair(std::move(form), std::move(meta), rank_tolerance);
}

DoubleWishartPair DoubleWishartPair::from_factors(RowMatrix fa, RowMatrix fb, PairMeta meta,
                                                  double rank_tolerance) {
    require_tolerance(rank_tolerance);
    if (fa.cols() != fb.cols()) throw ValidationError("factor rows of A and B differ in length");
    if (fa.cols() < 1) throw ValidationError("factors must have at least one column");
    if (!fa.allFinite() || !fb.allFinite()) throw ValidationError("factors have non-finite entries");
    return DoubleWishartPair(FactorForm{std::move(fa), std::move(fb)}, std::move(meta), rank_tolerance);
}

DoubleWishartPair DoubleWishartPair::with_shrunk_a(double ridge, double a_scale) const {
    if (!(ridge >= 0.0) || !(a_scale >= 0.0) || !std::isfinite(ridge) || !std::isfinite(a_scale)) {
        throw ValidationError("shrinkage ridge and scale must be finite and non-negative");
    }
    if (const auto* f = factor_form()) {
        FactorForm out = *f;
        out.ridge = ridge + a_scale * f->ridge;
        out.a_scale = a_scale * f->a_scale;
        return DoubleWishartPair(std::move(out), meta_, rank_tolerance_);
    }
    const auto& d = std::get<DenseForm>(form_);
    Matrix a = a_scale * d.a;
    a.diagonal().array() += ridge;
    return DoubleWishartPair(DenseForm{std::move(a), d.b}, meta_, rank_tolerance_);
}

DoubleWishartPair DoubleWishartPair::with_rank_tolerance(double rank_tolerance) const {
    require_tolerance(rank_tolerance);
    return DoubleWishartPair(form_, meta_, rank_tolerance);
}

Index DoubleWishartPair::dim() const noexcept {
    if (const auto* f = factor_form()) return f->fa.cols();
    return std::get<DenseForm>(form_).a.rows();
}

Matrix DoubleWishartPair::a() const {
    if (const auto* f = factor_form()) {
        Matrix a = f->a_scale * (f->fa.transpose() * f->fa);
        a.diagonal().array() += f->ridge;
        return a;
    }
    return std::get<DenseForm>(form_).a;
}

Matrix DoubleWishartPair::b() const {
    if (const auto* f = factor_form()) return f->fb.transpose() * f->fb;
    return std::get<DenseForm>(form_).b;
}

Matrix gram(const RowMatrix& f) {
    const auto& k = simd::active();
    const Index r = f.rows();
    const auto p = static_cast<std::size_t>(f.cols());
    Matrix out(r, r);
    for (Index i = 0; i < r; ++i) {
        const double* ri = f.row(i).data();
        for (Index j = 0; j <= i; ++j) {
            const double v = k.dot(ri, f.row(j).data(), p);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

Matrix cross_gram(const RowMatrix& b, const RowMatrix& a) {
    if (a.cols() != b.cols()) throw ValidationError("cross_gram: row lengths differ");
    const auto& k = simd::active();
    const auto p = static_cast<std::size_t>(a.cols());
    Matrix out(b.rows(), a.rows());
    for (Index i = 0; i < b.rows(); ++i) {
        const double* bi = b.row(i).data();
        for (Index j = 0; j < a.rows(); ++j) out(i, j) = k.dot(bi, a.row(j).data(), p);
    }
    return out;
}

TruncatedEvd truncated_evd(const Matrix& m, double rank_tolerance) {
    require_tolerance(rank_tolerance);
    require_symmetric(m, "matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
    if (es.info() != Eigen::Success) throw DegenerateError("eigendecomposition failed to converge");
    const Index n = m.rows();
    const double top = n > 0 ? es.eigenvalues()(n - 1) : 0.0;
    if (!(top > 0.0)) throw DegenerateError("matrix has rank zero");
    const double cutoff = rank_tolerance * top;
    Index rank = 0;
    while (rank < n && es.eigenvalues()(n - 1 - rank) > cutoff) ++rank;

    TruncatedEvd out;
    out.rank = rank;
    out.values.resize(rank);
    out.vectors.resize(n, rank);
    for (Index i = 0; i < rank; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

LargestRoot root_from_ratio(double theta, Index effective_rank) {
    LargestRoot r;
    r.effective_rank = effective_rank;
    theta = std::max(theta, 0.0);
    const double lambda = std::isinf(theta) ? 1.0 : theta / (1.0 + theta);
    if (lambda < kRootClip) {
        r.lambda = kRootClip;
        r.clipped = true;
    } else if (lambda > 1.0 - kRootClip) {
        r.lambda = 1.0 - kRootClip;
        r.clipped = true;
    } else {
        r.lambda = lambda;
    }
    r.logit_lambda = r.clipped ? std::log(r.lambda / (1.0 - r.lambda)) : std::log(theta);
    return r;
}

namespace {

/// Ratio-scale spectrum theta of the restricted problem det(B_r - theta A_r) = 0.
struct RatioSpectrum {
    std::vector<double> theta;  // descending, length = rank (zeros included)
    Index rank = 0;
    bool a_vanishes = false;    // A numerically zero while B is not: lambda = 1
};

using EigSolver = Eigen::SelfAdjointEigenSolver<Matrix>;

/// Eigenvalues of the symmetric PSD matrix m, descending, negatives clamped.
std::vector<double> descending_eigenvalues(const Matrix& m) {
    std::vector<double> out;
    if (m.rows() == 0) return out;
    EigSolver es(symmetrized(m), Eigen::EigenvaluesOnly);
    out.resize(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = std::max(es.eigenvalues()(m.rows() - 1 - i), 0.0);
    }
    return out;
}

/// Nonzero spectrum of h^T h padded with zeros to length `rank`.
std::vector<double> padded_gram_spectrum(const Matrix& h, Index rank) {
    std::vector<double> theta =
        h.rows() <= h.cols() ? descending_eigenvalues(h * h.transpose()) : descending_eigenvalues(h.transpose() * h);
    theta.resize(static_cast<std::size_t>(rank), 0.0);
    return theta;
}

bool a_is_zero(double trace_a, double trace_b, double tol) {
    const double total = trace_a + trace_b;
    if (!(total > 0.0)) throw DegenerateError("A + B has rank zero");
    return trace_a <= tol * total;
}

RatioSpectrum dense_spectrum(const Matrix& a, const Matrix& b, double tol) {
    RatioSpectrum out;
    if (a_is_zero(a.trace(), b.trace(), tol)) {
        out.a_vanishes = true;
        return out;
    }
    const TruncatedEvd evd = truncated_evd(a, tol);
    const Matrix w = evd.vectors * evd.values.cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix restricted = w.transpose() * b * w;
    out.rank = evd.rank;
    out.theta = descending_eigenvalues(restricted);
    return out;
}

/// Gram route for A = s fa^T fa, B = fb^T fb when fa has no more rows than columns.
/// With K = fa fa^T = V S^2 V^T truncated, the restricted matrix
/// D^-1/2 U^T B U D^-1/2 shares its nonzero spectrum with H H^T / s, where
/// H = fb fa^T V S^-2. Only r x r Gram matrices are formed.
RatioSpectrum gram_spectrum(const FactorForm& f, double tol, bool allow_cholesky) {
    RatioSpectrum out;
    const double s = f.a_scale;
    const Matrix kaa = gram(f.fa);
    const double trace_b = simd::active().sum_squares(f.fb.data(), static_cast<std::size_t>(f.fb.size()));
    if (a_is_zero(s * kaa.trace(), trace_b, tol)) {
        out.a_vanishes = true;
        return out;
    }
    const Matrix kba = cross_gram(f.fb, f.fa);
    const Index ra = kaa.rows();

    if (allow_cholesky) {
        Eigen::LLT<Matrix> llt(kaa);
        if (llt.info() == Eigen::Success && llt.rcond() > 100.0 * static_cast<double>(ra) * tol) {
            const Matrix x = llt.solve(kba.transpose());  // K^-1 K_AB
            out.rank = ra;
            out.theta = padded_gram_spectrum(x.transpose(), ra);
            for (double& t : out.theta) t /= s;
            return out;
        }
    }
    const TruncatedEvd evd = truncated_evd(kaa, tol);
    const Matrix h = kba * evd.vectors * evd.values.cwiseInverse().asDiagonal();
    out.rank = evd.rank;
    out.theta = padded_gram_spectrum(h, evd.rank);
    for (double& t : out.theta) t /= s;
    return out;
}

/// Shrunk A = c I + s fa^T fa (c > 0) is full rank. Nonzero theta are the
/// eigenvalues of fb A^-1 fb^T, evaluated with the Woodbury identity:
/// fb A^-1 fb^T = (K_BB - s K_BA (c I + s K_AA)^-1 K_AB) / c.
RatioSpectrum woodbury_spectrum(const FactorForm& f, Index p) {
    const double c = f.ridge;
    const double s = f.a_scale;
    Matrix m = gram(f.fb);
    if (s > 0.0 && f.fa.rows() > 0) {
        Matrix inner = s * gram(f.fa);
        inner.diagonal().array() += c;
        const Matrix kba = cross_gram(f.fb, f.fa);
        Eigen::LLT<Matrix> llt(inner);
        if (llt.info() != Eigen::Success) throw DegenerateError("shrunk A is not positive definite");
        m -= s * kba * llt.solve(kba.transpose());
    }
    m /= c;
    RatioSpectrum out;
    out.rank = p;
    out.theta = descending_eigenvalues(m);
    out.theta.resize(static_cast<std::size_t>(p), 0.0);
    return out;
}

RatioSpectrum spectrum(const DoubleWishartPair& pair, RootRoute route) {
    const double tol = pair.rank_tolerance();
    const FactorForm* f = pair.factor_form();
    if (f == nullptr || route == RootRoute::dense) return dense_spectrum(pair.a(), pair.b(), tol);
    const Index p = pair.dim();
    if (f->ridge > 0.0) {
        if (route == RootRoute::automatic && f->fa.rows() + f->fb.rows() > p) {
            return dense_spectrum(pair.a(), pair.b(), tol);
        }
        return woodbury_spectrum(*f, p);
    }
    if (!(f->a_scale > 0.0)) {
        const double trace_b = f->fb.squaredNorm();
        if (!(trace_b > 0.0)) throw DegenerateError("A + B has rank zero");
        RatioSpectrum out;
        out.a_vanishes = true;
        return out;
    }
    if (route == RootRoute::automatic && f->fa.rows() > p) return dense_spectrum(pair.a(), pair.b(), tol);
    return gram_spectrum(*f, tol, route == RootRoute::automatic);
}

}  // namespace

LargestRoot largest_root(const DoubleWishartPair& pair, RootRoute route) {
    const RatioSpectrum spec = spectrum(pair, route);
    if (spec.a_vanishes) return root_from_ratio(std::numeric_limits<double>::infinity(), 0);
    return root_from_ratio(spec.theta.empty() ? 0.0 : spec.theta.front(), spec.rank);
}

std::vector<double> all_roots(const DoubleWishartPair& pair, RootRoute route) {
    const RatioSpectrum spec = spectrum(pair, route);
    if (spec.a_vanishes) return {1.0};
    std::vector<double> roots;
    roots.reserve(spec.theta.size());
    for (double t : spec.theta) roots.push_back(std::isinf(t) ? 1.0 : t / (1.0 + t));
    return roots;
}

Vector leading_direction(const DoubleWishartPair& pair) {
    const double tol = pair.rank_tolerance();
    Vector w;
    const FactorForm* f = pair.factor_form();
    if (f == nullptr || (f->ridge == 0.0 && f->fa.rows() > pair.dim()) ||
        (f->ridge > 0.0 && f->fa.rows() + f->fb.rows() > pair.dim())) {
        const Matrix a = pair.a();
        const Matrix b = pair.b();
        if (a_is_zero(a.trace(), b.trace(), tol)) throw DegenerateError("A vanishes; no leading direction");
        const TruncatedEvd evd = truncated_evd(a, tol);
        const Matrix basis = evd.vectors * evd.values.cwiseSqrt().cwiseInverse().asDiagonal();
        EigSolver es(symmetrized(basis.transpose() * b * basis));
        w = basis * es.eigenvectors().col(evd.rank - 1);
    } else if (f->ridge > 0.0) {
        const double c = f->ridge;
        const double s = f->a_scale;
        Matrix inner = s * gram(f->fa);
        inner.diagonal().array() += c;
        const Matrix kba = cross_gram(f->fb, f->fa);
        Eigen::LLT<Matrix> llt(inner);
        Matrix m = gram(f->fb);
        if (s > 0.0) m -= s * kba * llt.solve(kba.transpose());
        EigSolver es(symmetrized(m));
        const Vector u = es.eigenvectors().col(m.rows() - 1);
        w = f->fb.transpose() * u;
        if (s > 0.0) w -= s * (f->fa.transpose() * llt.solve(kba.transpose() * u));
    } else {
        const Matrix kaa = gram(f->fa);
        if (a_is_zero(f->a_scale * kaa.trace(), f->fb.squaredNorm(), tol)) {
            throw DegenerateError("A vanishes; no leading direction");
        }
        const TruncatedEvd evd = truncated_evd(kaa, tol);
        const Matrix basis = evd.vectors * evd.values.cwiseInverse().asDiagonal();  // V S^-2
        const Matrix h = cross_gram(f->fb, f->fa) * basis;
        EigSolver es(symmetrized(h.transpose() * h));
        w = f->fa.transpose() * (basis * es.eigenvectors().col(evd.rank - 1));
    }
    const double norm = w.norm();
    if (!(norm > 0.0)) throw DegenerateError("leading direction vanished");
    w /= norm;
    Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    if (w(imax) < 0.0) w = -w;
    return w;
}

}  // namespace twee
