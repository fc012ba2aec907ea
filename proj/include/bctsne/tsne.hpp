#ifndef BCTSNE_TSNE_HPP
#define BCTSNE_TSNE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

/**
 * @file tsne.hpp
 *
 * @brief Exact t-SNE: input affinities, embedding affinities, KL loss, gradient and the momentum update.
 */

namespace bctsne {

/** Floor applied to affinities inside logarithms. */
inline constexpr double affinity_floor = 1e-12;

/**
 * @brief Symmetric input affinities `p_ij` with the per-point bandwidths used to build them.
 */
struct AffinityTable {
    /** n x n, symmetric, zero diagonal, entries summing to one. */
    Matrix P;
    /** Gaussian kernel variance for each point. */
    std::vector<double> sigma2;
    double perplexity = 0;
};

/**
 * @brief Optimizer settings. Defaults follow the usual exact t-SNE configuration
 * (1000 iterations, perplexity 30, learning rate 200, momentum 0.5 then 0.8 from iteration 250,
 * 12x early exaggeration for 250 iterations, adaptive gains).
 */
struct OptimizerConfig {
    std::size_t iterations = 1000;
    double perplexity = 30;
    double eta = 200;

    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    std::size_t momentum_switch = 250;

    /** Set to 1 (or the duration to 0) to disable early exaggeration. */
    double exaggeration = 12;
    std::size_t exaggeration_iters = 250;

    bool adaptive_gains = true;
    double min_gain = 0.01;

    std::size_t dims = 2;
    std::uint64_t seed = 42;

    /** Loss trace granularity, in iterations. */
    std::size_t trace_every = 50;

    double bandwidth_tol = 1e-5;
    std::size_t bandwidth_max_iter = 200;

    double momentum(std::size_t iter) const { return iter < momentum_switch ? momentum_initial : momentum_final; }
    double learning_rate(std::size_t) const { return eta; }
    bool exaggerating(std::size_t iter) const { return exaggeration != 1.0 && iter < exaggeration_iters; }

    void validate(std::size_t n) const {
        if (iterations < 1) {
            throw ValidationError("iterations must be at least 1");
        }
        if (!(perplexity >= 2) || !(perplexity < static_cast<double>(n))) {
            throw DomainError("perplexity " + std::to_string(perplexity) + " must lie in [2, " + std::to_string(n) + ")");
        }
        if (!(eta > 0)) {
            throw ValidationError("learning rate must be positive");
        }
        if (dims != 2 && dims != 3) {
            throw ValidationError("embedding dimension must be 2 or 3");
        }
        if (!(exaggeration > 0) || !(min_gain > 0) || trace_every < 1) {
            throw ValidationError("exaggeration, min_gain and trace_every must be positive");
        }
    }
};

/**
 * @brief Optimizer state: current and previous embedding plus the per-coordinate gains.
 */
struct EmbeddingState {
    Matrix Y;
    Matrix Y_prev;
    Matrix gains;
    std::size_t iter = 0;
    std::size_t q = 2;
    bool exaggeration_active = false;

    static EmbeddingState start(Matrix Y0) {
        EmbeddingState s;
        s.q = Y0.cols();
        s.Y_prev = Y0;
        s.gains = Matrix(Y0.rows(), Y0.cols(), 1.0);
        s.Y = std::move(Y0);
        return s;
    }
};

namespace internal {

// Fills `out` with the Gaussian conditional of point `i` and returns its entropy (nats).
inline double gaussian_row(std::span<const double> dist, std::size_t i, double sigma2, std::span<double> out) {
    const std::size_t n = dist.size();
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            dmin = std::min(dmin, dist[j]);
        }
    }

    const double beta = 0.5 / sigma2;
    double sum = 0, weighted = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            out[j] = 0;
            continue;
        }
        double shifted = dist[j] - dmin;
        double arg = shifted == 0 ? 0.0 : shifted * beta;
        double w = std::exp(-arg);
        out[j] = w;
        sum += w;
        weighted += w * arg;
    }
    for (std::size_t j = 0; j < n; ++j) {
        out[j] /= sum;
    }
    return std::log(sum) + weighted / sum;
}

}

/**
 * Per-point Gaussian bandwidths matching a target perplexity.
 *
 * For each row of the squared-distance matrix, bisects over `log(sigma2)` with brackets that
 * double in width until they straddle the target. Stops when `|exp(H) - perplexity| < tol`
 * or after `max_iter` evaluations.
 */
inline std::vector<double> calibrate_bandwidths(const Matrix& D, double perplexity, double tol = 1e-5,
                                                std::size_t max_iter = 200) {
    const std::size_t n = D.rows();
    if (D.cols() != n) {
        throw ValidationError("calibrate_bandwidths: distance matrix must be square");
    }
    if (!(perplexity >= 2) || !(perplexity < static_cast<double>(n))) {
        throw DomainError("perplexity " + std::to_string(perplexity) + " must lie in [2, " + std::to_string(n) + ")");
    }

    std::vector<double> sigma2(n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> buffer(n);
        for (std::size_t i = begin; i < end; ++i) {
            auto dist = D.row(i);
            double mean = 0;
            bool any = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    mean += dist[j];
                    any = any || dist[j] > 0;
                }
            }
            if (!any) {
                throw ValidationError("calibrate_bandwidths: row " + std::to_string(i) +
                                      " has zero distance to every other point (duplicate points)");
            }
            mean /= static_cast<double>(n - 1);

            double s = std::log(mean), lo = -std::numeric_limits<double>::infinity(), hi = -lo, step = 1;
            double best = s;
            for (std::size_t it = 0; it < max_iter; ++it) {
                double h = internal::gaussian_row(dist, i, std::exp(s), buffer);
                best = s;
                double perp = std::exp(h);
                if (std::abs(perp - perplexity) < tol) {
                    break;
                }
                if (perp > perplexity) {
                    hi = s;
                    s = std::isfinite(lo) ? 0.5 * (lo + hi) : s - step;
                } else {
                    lo = s;
                    s = std::isfinite(hi) ? 0.5 * (lo + hi) : s + step;
                }
                step *= 2;
            }
            sigma2[i] = std::exp(best);
        }
    });
    return sigma2;
}

/// Row-wise Gaussian conditionals, row `i` holding `p_{j|i}`.
inline Matrix gaussian_conditionals(const Matrix& D, const std::vector<double>& sigma2) {
    const std::size_t n = D.rows();
    Matrix out(n, n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            internal::gaussian_row(D.row(i), i, sigma2[i], out.row(i));
        }
    });
    return out;
}

/**
 * Symmetric input affinities `p_ij = (p_{j|i} + p_{i|j}) / 2n` from perplexity-calibrated Gaussian conditionals.
 */
inline AffinityTable input_affinities(const Matrix& X, double perplexity, double tol = 1e-5,
                                      std::size_t max_iter = 200) {
    const std::size_t n = X.rows();
    if (n < 4) {
        throw ValidationError("input_affinities: at least 4 points are required");
    }
    Matrix D = pairwise_sqdist(X);
    AffinityTable out;
    out.perplexity = perplexity;
    out.sigma2 = calibrate_bandwidths(D, perplexity, tol, max_iter);
    Matrix cond = gaussian_conditionals(D, out.sigma2);

    out.P = Matrix(n, n);
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = (cond(i, j) + cond(j, i)) / denom;
            out.P(i, j) = v;
            out.P(j, i) = v;
        }
    }
    return out;
}

/**
 * @brief Student-t kernel `W` and its normalized form `Q`.
 */
struct EmbeddingAffinities {
    Matrix Q;
    Matrix W;
    /** Sum of off-diagonal kernel values. */
    double normalizer = 0;
};

namespace internal {

// Kernel matrix plus per-row sums; the global sum is accumulated in row order.
inline double student_kernel(const Matrix& Y, Matrix& W) {
    const std::size_t n = Y.rows(), q = Y.cols();
    W = Matrix(n, n);
    std::vector<double> rowsum(n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto yi = Y.row(i);
            auto wrow = W.row(i);
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                auto yj = Y.row(j);
                double d = 0;
                for (std::size_t c = 0; c < q; ++c) {
                    double diff = yi[c] - yj[c];
                    d += diff * diff;
                }
                wrow[j] = 1.0 / (1.0 + d);
                s += wrow[j];
            }
            rowsum[i] = s;
        }
    });
    double total = 0;
    for (double s : rowsum) {
        total += s;
    }
    return total;
}

}

/**
 * Embedding affinities `q_ij = w_ij / sum_{k != l} w_kl` with `w_ij = 1 / (1 + |y_i - y_j|^2)`.
 * Off-diagonal entries of `Q` are floored at `affinity_floor`.
 */
inline EmbeddingAffinities embedding_affinities(const Matrix& Y) {
    EmbeddingAffinities out;
    out.normalizer = internal::student_kernel(Y, out.W);
    const std::size_t n = Y.rows();
    out.Q = Matrix(n, n);
    if (n < 2) {
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                out.Q(i, j) = std::max(out.W(i, j) / out.normalizer, affinity_floor);
            }
        }
    }
    return out;
}

/**
 * Kullback-Leibler divergence `sum_{i != j} p_ij log(p_ij / q_ij)`.
 * Zero `p_ij` contribute nothing; positive entries of both matrices are floored at `affinity_floor`.
 */
inline double kl_loss(const Matrix& P, const Matrix& Q) {
    if (P.rows() != Q.rows() || P.cols() != Q.cols()) {
        throw ValidationError("kl_loss: shape mismatch");
    }
    const std::size_t n = P.rows();
    double out = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double p = P(i, j);
            if (i == j || p <= 0) {
                continue;
            }
            double pf = std::max(p, affinity_floor);
            out += p * std::log(pf / std::max(Q(i, j), affinity_floor));
        }
    }
    return out;
}

inline double kl_loss(const AffinityTable& P, const Matrix& Q) {
    return kl_loss(P.P, Q);
}

/**
 * Gradient of the KL loss with respect to each embedding row:
 * `4 * sum_j (p_ij - q_ij) * w_ij * (y_i - y_j)`.
 */
inline Matrix kl_gradient(const Matrix& P, const Matrix& Y) {
    const std::size_t n = Y.rows(), q = Y.cols();
    if (P.rows() != n || P.cols() != n) {
        throw ValidationError("kl_gradient: affinity matrix does not match embedding size");
    }
    Matrix W;
    const double normalizer = internal::student_kernel(Y, W);

    Matrix grad(n, q);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto yi = Y.row(i);
            auto g = grad.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                double w = W(i, j);
                double mult = 4.0 * (P(i, j) - w / normalizer) * w;
                auto yj = Y.row(j);
                for (std::size_t c = 0; c < q; ++c) {
                    g[c] += mult * (yi[c] - yj[c]);
                }
            }
        }
    });
    return grad;
}

inline Matrix kl_gradient(const AffinityTable& P, const Matrix& Y) {
    return kl_gradient(P.P, Y);
}

/**
 * One momentum gradient-descent update,
 * `y <- y - eta * gain * grad + alpha * (y - y_prev)`.
 *
 * Gains grow by 0.2 where the gradient sign disagrees with the previous update and shrink by a
 * factor 0.8 otherwise, never dropping below `min_gain`. With `adaptive_gains` off they stay at one.
 */
inline EmbeddingState step(const EmbeddingState& state, const Matrix& grad, const OptimizerConfig& cfg) {
    if (grad.rows() != state.Y.rows() || grad.cols() != state.Y.cols()) {
        throw ValidationError("step: gradient shape does not match embedding");
    }
    for (double v : grad.values()) {
        if (!std::isfinite(v)) {
            throw OptimizerError("non-finite gradient", state.iter);
        }
    }

    const double alpha = cfg.momentum(state.iter), eta = cfg.learning_rate(state.iter);
    EmbeddingState next;
    next.q = state.q;
    next.iter = state.iter + 1;
    next.exaggeration_active = state.exaggeration_active;
    next.Y_prev = state.Y;
    next.gains = state.gains;
    next.Y = state.Y;

    auto sign = [](double v) { return (v > 0) - (v < 0); };
    auto y = next.Y.values();
    auto prev = state.Y_prev.values();
    auto cur = state.Y.values();
    auto g = grad.values();
    auto gains = next.gains.values();
    for (std::size_t i = 0; i < y.size(); ++i) {
        double velocity = cur[i] - prev[i];
        if (cfg.adaptive_gains) {
            gains[i] = sign(g[i]) != sign(velocity) ? gains[i] + 0.2 : gains[i] * 0.8;
            gains[i] = std::max(gains[i], cfg.min_gain);
        }
        y[i] = cur[i] - eta * gains[i] * g[i] + alpha * velocity;
        if (!std::isfinite(y[i])) {
            throw OptimizerError("embedding became non-finite", state.iter);
        }
    }
    return next;
}

}

#endif
