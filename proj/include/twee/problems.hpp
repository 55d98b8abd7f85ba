#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twee/linalg.hpp"
#include "twee/random.hpp"

namespace twee {

/// One-way MANOVA: A is the within-group and B the between-group sum of squares.
struct ManovaSpec {
    DataMatrix y;
    std::vector<std::string> groups;  // one label per row of y
};

/// Equality of two covariance matrices: A = n1 S1, B = n2 S2.
struct CovEqualSpec {
    DataMatrix x;
    DataMatrix y;
};

/// Canonical correlation between a high-dimensional x and a low-dimensional y.
/// The side with fewer columns than rows becomes the projector.
struct CcaSpec {
    DataMatrix x;
    DataMatrix y;
};

/// Principal component of explained variance of responses y on covariates x,
/// adjusting for optional confounders.
struct PcevSpec {
    DataMatrix y;
    DataMatrix x;
    std::optional<DataMatrix> confounders;
};

using ProblemSpec = std::variant<ManovaSpec, CovEqualSpec, CcaSpec, PcevSpec>;

/// Throws ValidationError when the spec breaks its structural invariants.
void validate(const ManovaSpec& spec);
void validate(const CovEqualSpec& spec);
void validate(const CcaSpec& spec);
void validate(const PcevSpec& spec);
void validate(const ProblemSpec& spec);

DoubleWishartPair build_manova(const ManovaSpec& spec, double rank_tolerance = kDefaultRankTolerance);
DoubleWishartPair build_covequal(const CovEqualSpec& spec, double rank_tolerance = kDefaultRankTolerance);
DoubleWishartPair build_cca(const CcaSpec& spec, double rank_tolerance = kDefaultRankTolerance);
DoubleWishartPair build_pcev(const PcevSpec& spec, double rank_tolerance = kDefaultRankTolerance);
DoubleWishartPair build_pair(const ProblemSpec& spec, double rank_tolerance = kDefaultRankTolerance);

/// Permutation schemes:
///   MANOVA   group labels are permuted;
///   covequal both samples are centered, pooled and reassigned;
///   CCA      rows of x are permuted;
///   PCEV     rows of y are permuted, x and confounders stay fixed.
ManovaSpec permute(const ManovaSpec& spec, Rng& rng);
CovEqualSpec permute(const CovEqualSpec& spec, Rng& rng);
CcaSpec permute(const CcaSpec& spec, Rng& rng);
PcevSpec permute(const PcevSpec& spec, Rng& rng);
ProblemSpec permute(const ProblemSpec& spec, Rng& rng);

const char* problem_name(const ProblemSpec& spec);

struct PcevComponent {
    Vector weights;  // unit p-vector attaining the largest root
    Vector scores;   // adjusted responses times weights
    Vector vif;      // correlation of each adjusted response with the scores
    std::vector<bool> zero_variance;  // columns whose vif was set to 0
};

PcevComponent pcev_component_and_vif(const PcevSpec& spec, const DoubleWishartPair& pair);

/// Proportion of variance explained along w: w^T B w / w^T (A + B) w.
double explained_variance_ratio(const DoubleWishartPair& pair, const Vector& w);

}  // namespace twee
