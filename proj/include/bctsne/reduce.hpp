#ifndef BCTSNE_REDUCE_HPP
#define BCTSNE_REDUCE_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "design.hpp"
#include "linalg.hpp"
#include "matrix.hpp"

/**
 * @file reduce.hpp
 *
 * @brief Low-rank reduction of the data, optionally with linear batch effects removed.
 */

namespace bctsne {

/**
 * @brief Reduced n x k scores fed to t-SNE.
 */
struct ReducedData {
    Matrix X_hat;
    std::size_t k = 0;
    /** Fraction of the (centered, scaled) total variance carried by each output column. */
    std::vector<double> explained_variance;
};

struct ReduceOptions {
    /** Number of components; zero picks `default_components()`. */
    std::size_t k = 0;
    bool center = true;
    bool scale = false;
    std::uint64_t seed = 42;
};

/// 30 components up to 1000 cells, 50 beyond.
inline std::size_t default_components(std::size_t n) {
    return n <= 1000 ? 30 : 50;
}

namespace internal {

inline std::size_t resolve_rank(const Matrix& X, std::size_t k) {
    std::size_t m = std::min(X.rows(), X.cols());
    if (k == 0) {
        k = std::min(default_components(X.rows()), m);
    }
    if (k < 1 || k > m) {
        throw DomainError("number of components " + std::to_string(k) + " outside [1, " + std::to_string(m) + "]");
    }
    return k;
}

// Centers/scales columns in place and returns the total sum of squares.
inline double standardize(Matrix& X, bool center, bool scale) {
    const std::size_t n = X.rows(), p = X.cols();
    double centered_total = 0;
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mean += X(i, j);
        }
        mean /= static_cast<double>(n);
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = X(i, j) - mean;
            ss += d * d;
        }
        centered_total += ss;
        double shift = center ? mean : 0.0;
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        double div = (scale && sd > 0) ? sd : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            X(i, j) = (X(i, j) - shift) / div;
        }
    }

    if (!(centered_total > 0)) {
        throw ValidationError("input matrix has zero variance");
    }
    return X.eigen().squaredNorm();
}

inline ReducedData reduce_impl(const Matrix& X, const BatchDesign* design, const ReduceOptions& opt) {
    if (X.rows() < 2) {
        throw ValidationError("at least two observations are required");
    }
    if (design && design->rows() != X.rows()) {
        throw ValidationError("batch design has " + std::to_string(design->rows()) + " rows but data has " +
                              std::to_string(X.rows()));
    }
    X.validate_finite();
    const std::size_t k = resolve_rank(X, opt.k);

    Matrix work = X;
    double total = standardize(work, opt.center, opt.scale);

    SvdResult svd = truncated_svd(work, k, opt.seed);
    Matrix scores(X.rows(), k);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            scores(i, c) = svd.U(i, c) * svd.S[c];
        }
    }

    ReducedData out;
    out.k = k;
    if (design) {
        const Matrix* Z = &design->Z;
        Matrix with_intercept;
        if (!design->has_intercept) {
            with_intercept = Matrix(X.rows(), design->cols() + 1, 1.0);
            for (std::size_t i = 0; i < X.rows(); ++i) {
                for (std::size_t j = 0; j < design->cols(); ++j) {
                    with_intercept(i, j + 1) = design->Z(i, j);
                }
            }
            Z = &with_intercept;
        }
        out.X_hat = residualize(*Z, scores);
    } else {
        out.X_hat = std::move(scores);
    }

    out.explained_variance.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        out.explained_variance[c] = out.X_hat.eigen().col(static_cast<Eigen::Index>(c)).squaredNorm() / total;
    }
    return out;
}

}

/**
 * Plain truncated PCA: optional centering/scaling, then the first `k` SVD scores `U * diag(S)`.
 */
inline ReducedData pca_reduce(const Matrix& X, const ReduceOptions& opt = {}) {
    return internal::reduce_impl(X, nullptr, opt);
}

/**
 * PCA scores with their linear association to the batch design removed.
 *
 * The first `k` scores `T = U * diag(S)` are regressed on the design (with an intercept
 * prepended if the design lacks one) and replaced by their residuals, so every output
 * column is orthogonal to the centered batch indicators.
 */
inline ReducedData og_reduce(const Matrix& X, const BatchDesign& design, const ReduceOptions& opt = {}) {
    return internal::reduce_impl(X, &design, opt);
}

}

#endif
