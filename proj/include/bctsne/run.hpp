#ifndef BCTSNE_RUN_HPP
#define BCTSNE_RUN_HPP

#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "matrix.hpp"
#include "projection.hpp"
#include "tsne.hpp"

/**
 * @file run.hpp
 *
 * @brief Full t-SNE optimization, optionally constrained to the complement of a batch design.
 */

namespace bctsne {

/**
 * @brief One checkpoint of the loss trace.
 */
struct TraceEntry {
    /** Number of completed iterations. */
    std::size_t iteration = 0;
    /** KL divergence against the non-exaggerated affinities. */
    double kl_loss = 0;
    /** `max |Z^T Y|` for a projected run, NaN otherwise. */
    double orthogonality_maxabs = std::numeric_limits<double>::quiet_NaN();
};

/**
 * @brief Read-only view passed to the per-iteration observer.
 */
struct IterationView {
    const EmbeddingState& state;
    /** Non-exaggerated input affinities. */
    const AffinityTable& affinities;
    const Projector* projector;
};

using IterationObserver = std::function<void(const IterationView&)>;

struct TsneResult {
    EmbeddingState state;
    std::vector<TraceEntry> trace;
    AffinityTable affinities;
};

/// Initial embedding, standard normal scaled by 1e-4.
inline Matrix random_init(std::size_t n, std::size_t q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1e-4);
    Matrix Y(n, q);
    for (auto& v : Y.values()) {
        v = normal(rng);
    }
    return Y;
}

/**
 * Runs `cfg.iterations` momentum updates of t-SNE on `X_hat`.
 *
 * The first `cfg.exaggeration_iters` iterations use affinities multiplied by `cfg.exaggeration`.
 * When a projector is supplied, the initial embedding and every subsequent iterate are
 * projected onto the orthogonal complement of its design, and the result is the projected iterate.
 * A trace entry is recorded every `cfg.trace_every` iterations and after the last one;
 * `observer`, when set, sees the state after every iteration.
 */
inline TsneResult run_tsne(const Matrix& X_hat, const OptimizerConfig& cfg, const Projector* projector = nullptr,
                           const IterationObserver& observer = {}) {
    const std::size_t n = X_hat.rows();
    cfg.validate(n);
    if (projector && projector->rows() != n) {
        throw ValidationError("run_tsne: projector rows do not match data rows");
    }

    TsneResult out;
    out.affinities = input_affinities(X_hat, cfg.perplexity, cfg.bandwidth_tol, cfg.bandwidth_max_iter);
    const Matrix& P = out.affinities.P;

    Matrix exaggerated;
    if (cfg.exaggeration_iters > 0 && cfg.exaggeration != 1.0) {
        exaggerated = P;
        for (auto& v : exaggerated.values()) {
            v *= cfg.exaggeration;
        }
    }

    Matrix Y0 = random_init(n, cfg.dims, cfg.seed);
    if (projector) {
        Y0 = projector->project(Y0);
    }
    EmbeddingState state = EmbeddingState::start(std::move(Y0));

    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        state.exaggeration_active = cfg.exaggerating(t);
        const Matrix& target = state.exaggeration_active ? exaggerated : P;
        Matrix grad = kl_gradient(target, state.Y);
        state = projector ? projected_step(state, grad, cfg, *projector) : step(state, grad, cfg);

        if (state.iter % cfg.trace_every == 0 || state.iter == cfg.iterations) {
            TraceEntry entry;
            entry.iteration = state.iter;
            entry.kl_loss = kl_loss(P, embedding_affinities(state.Y).Q);
            if (projector) {
                entry.orthogonality_maxabs = projector->orthogonality(state.Y);
            }
            out.trace.push_back(entry);
        }
        if (observer) {
            observer(IterationView{state, out.affinities, projector});
        }
    }

    out.state = std::move(state);
    return out;
}

}

#endif
