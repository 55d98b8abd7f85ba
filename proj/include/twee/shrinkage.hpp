#pragma once

#include <string>

#include "twee/linalg.hpp"

namespace twee {

/// Ledoit-Wolf linear shrinkage S* = (b2/d2) m I + (a2/d2) S, with the inner
/// product <A, B> = trace(A B^T) / p and S = X^T X / n (divisor n).
struct ShrinkageEstimate {
    Matrix s_star;
    double m_hat = 0.0;
    double d2_hat = 0.0;
    double b2_hat = 0.0;
    double a2_hat = 0.0;
    double intensity = 0.0;   // b2 / d2
    bool degenerate = false;  // d2 == 0: S is already spherical, S* = m I
    std::string divisor = "n";
};

/// Scalar part of the estimate, without S*.
struct ShrinkageCoefficients {
    double m_hat = 0.0;
    double d2_hat = 0.0;
    double b2_bar = 0.0;  // before truncation at d2
    double b2_hat = 0.0;
    double a2_hat = 0.0;
    double intensity = 0.0;
    bool degenerate = false;
};

struct LedoitWolfOptions {
    bool center = true;  // subtract column means before forming S
};

ShrinkageEstimate ledoit_wolf(const DataMatrix& data, const LedoitWolfOptions& options = {});

/// Coefficients from the n x n Gram matrix G = X X^T of (already centered) rows:
/// m = tr G / (n p), d2 = ||G||^2 / (n^2 p) - m^2,
/// b2_bar = (sum G_kk^2 - ||G||^2 / n) / (n^2 p).
ShrinkageCoefficients ledoit_wolf_from_gram(const Matrix& g, Index p);

/// Coefficients straight from the definitions on the p x p covariance, O(n p^2).
ShrinkageCoefficients ledoit_wolf_reference(const Matrix& centered_rows);

/// Applies the truncation b2 = min(b2_bar, d2) and forms S* from a given
/// covariance S and sampling-error estimate b2_bar.
ShrinkageEstimate shrink_from_moments(const Matrix& s, double b2_bar);

/// Returns (A*, B) with A* = n S*, where data_for_a holds the n rows whose
/// Gram matrix X^T X is A. Rows are used as given (no further centering).
DoubleWishartPair build_shrunk_pair(const DoubleWishartPair& pair, const DataMatrix& data_for_a);

/// Same shrinkage applied to a factored pair without forming p x p matrices:
/// A* = n intensity m I + (1 - intensity) A, with n the number of factor rows of A.
DoubleWishartPair shrink_pair(const DoubleWishartPair& pair);

}  // namespace twee
