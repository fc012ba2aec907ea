#ifndef BCTSNE_PROJECTION_HPP
#define BCTSNE_PROJECTION_HPP

#include <string>

#include "Eigen/Dense"

#include "design.hpp"
#include "matrix.hpp"
#include "tsne.hpp"

/**
 * @file projection.hpp
 *
 * @brief Orthogonal projection of embeddings away from the batch design, and the projected update.
 */

namespace bctsne {

/**
 * @brief Projects matrices onto the orthogonal complement of the column span of a design `Z`.
 *
 * `project(Y)` returns `Y - Z * beta` with `beta` the least-squares coefficients of `Y` on `Z`.
 * The design is factorized once with a column-pivoted Householder QR; its leading `rank`
 * columns of `Q` form an orthonormal basis of `span(Z)` and the projection is
 * computed as `Y - Q (Q^T Y)`, which equals the regression residual.
 */
class Projector {
public:
    Projector() = default;

    explicit Projector(const Matrix& Z) : Z_(Z) {
        factorize();
    }

    explicit Projector(const BatchDesign& design) : Projector(design.Z) {}

    const Matrix& design() const { return Z_; }
    std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }
    std::size_t rows() const { return Z_.rows(); }

    /// Replaces the design and refreshes the cached factorization.
    void reset(const Matrix& Z) {
        Z_ = Z;
        factorize();
    }

    Matrix project(const Matrix& Y) const {
        if (Y.rows() != Z_.rows()) {
            throw ValidationError("project: embedding has " + std::to_string(Y.rows()) + " rows but design has " +
                                  std::to_string(Z_.rows()));
        }
        if (basis_.cols() == 0) {
            return Y;
        }
        auto y = Y.eigen();
        RowMajor coef = basis_.transpose() * y;
        RowMajor out = y - basis_ * coef;
        return Matrix::from_eigen(out);
    }

    /// Largest absolute entry of `Z^T Y`; zero for a design without columns.
    double orthogonality(const Matrix& Y) const {
        if (Z_.cols() == 0) {
            return 0;
        }
        RowMajor zty = Z_.eigen().transpose() * Y.eigen();
        return zty.cwiseAbs().maxCoeff();
    }

private:
    void factorize() {
        if (Z_.cols() == 0) {
            basis_.resize(static_cast<Eigen::Index>(Z_.rows()), 0);
            return;
        }
        Eigen::ColPivHouseholderQR<RowMajor> qr(Z_.eigen());
        const Eigen::Index r = qr.rank();
        basis_ = qr.householderQ() * RowMajor::Identity(Z_.eigen().rows(), r);
    }

    Matrix Z_;
    RowMajor basis_;
};

inline Matrix project(const Projector& projector, const Matrix& Y) {
    return projector.project(Y);
}

/**
 * Momentum step followed by projection of the new iterate.
 * The returned state's `Y_prev` is the incoming (already projected) `Y`, so the momentum
 * term of the next update stays inside the constraint set.
 */
inline EmbeddingState projected_step(const EmbeddingState& state, const Matrix& grad, const OptimizerConfig& cfg,
                                     const Projector& projector) {
    EmbeddingState next = step(state, grad, cfg);
    next.Y = projector.project(next.Y);
    return next;
}

}

#endif
