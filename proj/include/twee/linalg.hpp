#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace twee {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Row-major storage: each observation (row) is contiguous, which is what the
/// Gram kernels stream over.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultRankTolerance = 1e-9;
/// Roots closer than this to 0 or 1 are clipped and flagged.
inline constexpr double kRootClip = 1e-12;

/// Dense n x p observation matrix (rows are samples) with column labels.
class DataMatrix {
public:
    DataMatrix() = default;
    /// Throws ValidationError on NaN/Inf, n < 2, p < 1 or a label count mismatch.
    /// Empty labels are replaced by "v1", "v2", ...
    explicit DataMatrix(Matrix values, std::vector<std::string> labels = {});

    Index rows() const noexcept { return values_.rows(); }
    Index cols() const noexcept { return values_.cols(); }
    const Matrix& values() const noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    DataMatrix select_rows(const std::vector<Index>& order) const;
    Vector column_means() const;
    DataMatrix centered() const;

private:
    Matrix values_;
    std::vector<std::string> labels_;
};

struct PairMeta {
    std::string label;
    double df_a = 0.0;  // degrees of freedom of A
    double df_b = 0.0;  // degrees of freedom of B
};

/// A and B held as explicit symmetric p x p matrices.
struct DenseForm {
    Matrix a;
    Matrix b;
};

/// A = ridge * I + a_scale * fa^T fa and B = fb^T fb, with factor rows of length p.
struct FactorForm {
    RowMatrix fa;
    RowMatrix fb;
    double ridge = 0.0;
    double a_scale = 1.0;
};

/// The (A, B) pair of det(B - lambda (A + B)) = 0.
class DoubleWishartPair {
public:
    /// Validates symmetry (1e-10 relative) and positive semi-definiteness
    /// (eigenvalues >= -rank_tolerance * lambda_max(A + B)), then symmetrizes.
    static DoubleWishartPair from_matrices(const Matrix& a, const Matrix& b, PairMeta meta = {},
                                           double rank_tolerance = kDefaultRankTolerance);
    static DoubleWishartPair from_factors(RowMatrix fa, RowMatrix fb, PairMeta meta = {},
                                          double rank_tolerance = kDefaultRankTolerance);

    /// Pair with A replaced by ridge * I + a_scale * A.
    DoubleWishartPair with_shrunk_a(double ridge, double a_scale) const;
    DoubleWishartPair with_rank_tolerance(double rank_tolerance) const;

    Index dim() const noexcept;
    bool factored() const noexcept { return std::holds_alternative<FactorForm>(form_); }
    const DenseForm* dense_form() const noexcept { return std::get_if<DenseForm>(&form_); }
    const FactorForm* factor_form() const noexcept { return std::get_if<FactorForm>(&form_); }

    /// Dense materialization (p x p).
    Matrix a() const;
    Matrix b() const;

    double rank_tolerance() const noexcept { return rank_tolerance_; }
    const PairMeta& meta() const noexcept { return meta_; }

private:
    DoubleWishartPair(std::variant<DenseForm, FactorForm> form, PairMeta meta, double rank_tolerance);

    std::variant<DenseForm, FactorForm> form_;
    PairMeta meta_;
    double rank_tolerance_ = kDefaultRankTolerance;
};

struct LargestRoot {
    double lambda = 0.0;
    double logit_lambda = 0.0;
    Index effective_rank = 0;  // rank of A on which the problem was solved
    bool clipped = false;
};

/// Builds a LargestRoot from theta = lambda / (1 - lambda), the root of the
/// ratio problem det(B - theta A) = 0. The logit is log(theta), which keeps
/// precision when lambda is close to 1.
LargestRoot root_from_ratio(double theta, Index effective_rank);

struct TruncatedEvd {
    Vector values;   // descending
    Matrix vectors;  // orthonormal columns, one per kept eigenvalue
    Index rank = 0;
};

/// Eigenpairs of a symmetric matrix with eigenvalue > rank_tolerance * max eigenvalue.
TruncatedEvd truncated_evd(const Matrix& m, double rank_tolerance);

/// Solver selection. `automatic` picks the cheapest exact route for the pair's form;
/// the others force a route (used to cross-check routes against each other).
enum class RootRoute { automatic, dense, gram_evd };

LargestRoot largest_root(const DoubleWishartPair& pair, RootRoute route = RootRoute::automatic);

/// Full restricted spectrum on the lambda scale, descending, each in [0, 1].
std::vector<double> all_roots(const DoubleWishartPair& pair, RootRoute route = RootRoute::automatic);

/// Unit vector w in R^p attaining the largest root, i.e. maximizing
/// w^T B w / w^T (A + B) w over the restricted subspace. The sign is fixed so
/// that the entry of largest magnitude is positive.
Vector leading_direction(const DoubleWishartPair& pair);

/// f f^T for row-major factor rows.
Matrix gram(const RowMatrix& f);
/// b a^T for row-major factor rows of equal length.
Matrix cross_gram(const RowMatrix& b, const RowMatrix& a);

/// Throws ValidationError when m is not square or not symmetric within
/// 1e-10 relative to its largest absolute entry.
void require_symmetric(const Matrix& m, const char* name);

}  // namespace twee
