#ifndef BCTSNE_LINALG_HPP
#define BCTSNE_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "Eigen/Dense"

#include "matrix.hpp"
#include "parallel.hpp"

/**
 * @file linalg.hpp
 *
 * @brief Truncated SVD, least squares and pairwise distances.
 */

namespace bctsne {

/**
 * @brief Rank-k singular value decomposition, `A ~ U * diag(S) * V^T`.
 */
struct SvdResult {
    /** n x k, orthonormal columns. */
    Matrix U;
    /** k singular values, nonincreasing. */
    std::vector<double> S;
    /** p x k, orthonormal columns. */
    Matrix V;
};

/**
 * Matrices with `min(rows, cols)` at or below this size are decomposed exactly;
 * larger ones go through the randomized range finder.
 */
inline constexpr std::size_t exact_svd_limit = 512;

namespace internal {

inline RowMajor thin_q(const RowMajor& A) {
    Eigen::HouseholderQR<RowMajor> qr(A);
    return qr.householderQ() * RowMajor::Identity(A.rows(), A.cols());
}

// Flip each singular pair so that the largest-magnitude entry of U's column is positive.
inline void canonicalize_signs(RowMajor& U, RowMajor& V) {
    for (Eigen::Index c = 0; c < U.cols(); ++c) {
        Eigen::Index where = 0;
        U.col(c).cwiseAbs().maxCoeff(&where);
        if (U(where, c) < 0) {
            U.col(c) *= -1;
            V.col(c) *= -1;
        }
    }
}

inline SvdResult pack_svd(RowMajor U, const Eigen::VectorXd& S, RowMajor V, std::size_t k) {
    U.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(k));
    V.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(k));
    canonicalize_signs(U, V);
    SvdResult out;
    out.U = Matrix::from_eigen(U);
    out.V = Matrix::from_eigen(V);
    out.S.assign(S.data(), S.data() + k);
    return out;
}

}

/**
 * Computes the leading `k` singular triplets of `A`.
 *
 * Small problems use a full bidiagonal divide-and-conquer SVD, so the result is exact up to rounding.
 * Larger problems use a randomized range finder with 10 oversampling columns and 2 power iterations,
 * re-orthonormalized between passes. The Gaussian test matrix is drawn from `seed`, making the
 * output deterministic for a fixed seed.
 *
 * Singular vector signs are fixed so that the largest-magnitude entry of each column of `U` is positive.
 */
inline SvdResult truncated_svd(const Matrix& A, std::size_t k, std::uint64_t seed = 42) {
    const std::size_t n = A.rows(), p = A.cols(), m = std::min(n, p);
    if (k < 1 || k > m) {
        throw DomainError("truncated_svd: rank " + std::to_string(k) + " outside [1, " + std::to_string(m) + "]");
    }
    A.validate_finite();

    if (m <= exact_svd_limit) {
        Eigen::BDCSVD<RowMajor> svd(A.eigen(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        return internal::pack_svd(svd.matrixU(), svd.singularValues(), svd.matrixV(), k);
    }

    const auto l = static_cast<Eigen::Index>(std::min(k + 10, m));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    RowMajor omega(static_cast<Eigen::Index>(p), l);
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        omega.data()[i] = normal(rng);
    }

    auto a = A.eigen();
    RowMajor Q = internal::thin_q(a * omega);
    for (int it = 0; it < 2; ++it) {
        RowMajor W = internal::thin_q(a.transpose() * Q);
        Q = internal::thin_q(a * W);
    }

    RowMajor B = Q.transpose() * a;
    Eigen::BDCSVD<RowMajor> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RowMajor U = Q * svd.matrixU();
    return internal::pack_svd(std::move(U), svd.singularValues(), svd.matrixV(), k);
}

/**
 * Least-squares coefficients `beta` minimizing `||Y - Z * beta||_F`.
 *
 * Solved through a complete orthogonal decomposition of `Z`, so collinear designs
 * yield the minimum-norm solution instead of failing.
 */
inline Matrix lstsq(const Matrix& Z, const Matrix& Y) {
    if (Z.rows() != Y.rows()) {
        throw ValidationError("lstsq: design has " + std::to_string(Z.rows()) + " rows but response has " +
                              std::to_string(Y.rows()));
    }
    if (Z.rows() < Z.cols()) {
        throw ValidationError("lstsq: fewer rows than design columns");
    }
    if (Z.cols() == 0) {
        return Matrix(0, Y.cols());
    }
    Eigen::CompleteOrthogonalDecomposition<RowMajor> cod(Z.eigen());
    RowMajor beta = cod.solve(RowMajor(Y.eigen()));
    return Matrix::from_eigen(beta);
}

/// Residuals `Y - Z * lstsq(Z, Y)`.
inline Matrix residualize(const Matrix& Z, const Matrix& Y) {
    Matrix beta = lstsq(Z, Y);
    if (Z.cols() == 0) {
        return Y;
    }
    RowMajor res = Y.eigen() - Z.eigen() * beta.eigen();
    return Matrix::from_eigen(res);
}

/**
 * Squared Euclidean distances between all rows of `A`.
 *
 * Entries are accumulated from coordinate differences rather than the
 * `|a|^2 + |b|^2 - 2 a.b` expansion, so the result is exactly symmetric,
 * nonnegative and zero on the diagonal without any clamping.
 */
inline Matrix pairwise_sqdist(const Matrix& A) {
    const std::size_t n = A.rows(), d = A.cols();
    Matrix out(n, n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto ai = A.row(i);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                auto aj = A.row(j);
                double s = 0;
                for (std::size_t c = 0; c < d; ++c) {
                    double diff = ai[c] - aj[c];
                    s += diff * diff;
                }
                orow[j] = s;
            }
        }
    });
    return out;
}

}

#endif
