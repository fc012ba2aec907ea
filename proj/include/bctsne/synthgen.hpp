#ifndef BCTSNE_SYNTHGEN_HPP
#define BCTSNE_SYNTHGEN_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "labels.hpp"
#include "matrix.hpp"

/**
 * @file synthgen.hpp
 *
 * @brief Gamma-Poisson simulator of single-cell count matrices with batch and cell-type structure.
 */

namespace bctsne {

/**
 * @brief Simulation parameters.
 *
 * Batch and group effects are multiplicative log-normal factors on gene means.
 * Every gene receives a batch factor; a `de_prob` fraction of genes per group
 * receives a group factor.
 */
struct SimSpec {
    std::size_t n_cells = 800;
    std::size_t n_genes = 2000;
    std::size_t n_batches = 4;
    std::size_t n_groups = 4;

    double batch_effect_sd = 0.6;
    double group_effect_sd = 0.7;
    double de_prob = 0.1;

    /** Gamma prior on gene base means (shape, rate). */
    double mean_shape = 0.6;
    double mean_rate = 0.3;

    /** Log-normal library size. */
    double lib_size_location = 9.0;
    double lib_size_scale = 0.2;

    std::uint64_t seed = 1;

    void validate() const {
        if (n_cells < 1 || n_genes < 1 || n_batches < 1 || n_groups < 1) {
            throw ValidationError("simulation sizes must be at least 1");
        }
        if (!(batch_effect_sd >= 0) || !(group_effect_sd >= 0) || !(lib_size_scale >= 0)) {
            throw ValidationError("effect and library-size spreads must be nonnegative");
        }
        if (!(de_prob >= 0 && de_prob <= 1)) {
            throw ValidationError("de_prob must lie in [0, 1]");
        }
        if (!(mean_shape > 0) || !(mean_rate > 0)) {
            throw ValidationError("gene mean gamma parameters must be positive");
        }
        if (!std::isfinite(lib_size_location)) {
            throw ValidationError("library size location must be finite");
        }
    }
};

/**
 * @brief Simulated counts with labels and the factors that produced them.
 */
struct SimOutput {
    Matrix counts;
    std::vector<std::string> cell_ids;
    std::vector<std::string> gene_ids;
    Categorical batch;
    Categorical group;

    std::vector<double> base_mean;
    /** genes x batches. */
    Matrix batch_factors;
    /** genes x groups; 1 for genes not differentially expressed in a group. */
    Matrix group_factors;
    std::vector<double> lib_size;

    LabelTable labels() const {
        LabelTable out;
        out.ids = cell_ids;
        out.columns = {batch, group};
        return out;
    }
};

namespace internal {

inline std::string padded(const char* prefix, std::size_t value, std::size_t total) {
    int width = static_cast<int>(std::to_string(total).size());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, value);
    return buf;
}

}

/**
 * Draws a count matrix.
 *
 * Cell `i` belongs to batch `i mod B` and group `(i / B) mod G`, so every batch/group
 * combination is equally represented when `n_cells` is a multiple of `B * G`.
 * The expected count of gene `g` in cell `c` is the cell's library size times the gene's share of
 * `base_mean[g] * batch_factor[g, batch(c)] * group_factor[g, group(c)]` within that cell.
 */
inline SimOutput simulate(const SimSpec& spec) {
    spec.validate();
    const std::size_t n = spec.n_cells, p = spec.n_genes, B = spec.n_batches, G = spec.n_groups;
    std::mt19937_64 rng(spec.seed);

    SimOutput out;
    std::vector<std::string> batch_values(n), group_values(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.cell_ids.push_back(internal::padded("Cell", i + 1, n));
        batch_values[i] = internal::padded("Batch", i % B + 1, B);
        group_values[i] = internal::padded("Group", (i / B) % G + 1, G);
    }
    for (std::size_t g = 0; g < p; ++g) {
        out.gene_ids.push_back(internal::padded("Gene", g + 1, p));
    }
    out.batch = Categorical("batch", batch_values);
    out.group = Categorical("group", group_values);

    std::gamma_distribution<double> gamma(spec.mean_shape, 1.0 / spec.mean_rate);
    out.base_mean.resize(p);
    for (auto& m : out.base_mean) {
        m = gamma(rng);
    }

    std::normal_distribution<double> normal;
    out.batch_factors = Matrix(p, B, 1.0);
    for (std::size_t g = 0; g < p; ++g) {
        for (std::size_t b = 0; b < B; ++b) {
            out.batch_factors(g, b) = std::exp(spec.batch_effect_sd * normal(rng));
        }
    }

    std::uniform_real_distribution<double> unif;
    out.group_factors = Matrix(p, G, 1.0);
    for (std::size_t g = 0; g < p; ++g) {
        for (std::size_t k = 0; k < G; ++k) {
            if (unif(rng) < spec.de_prob) {
                out.group_factors(g, k) = std::exp(spec.group_effect_sd * normal(rng));
            }
        }
    }

    out.lib_size.resize(n);
    for (auto& l : out.lib_size) {
        l = std::exp(spec.lib_size_location + spec.lib_size_scale * normal(rng));
    }

    // Normalized gene proportions for each (batch, group) combination.
    std::vector<std::vector<double>> share(B * G, std::vector<double>(p));
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t k = 0; k < G; ++k) {
            auto& s = share[b * G + k];
            double total = 0;
            for (std::size_t g = 0; g < p; ++g) {
                s[g] = out.base_mean[g] * out.batch_factors(g, b) * out.group_factors(g, k);
                total += s[g];
            }
            for (auto& v : s) {
                v /= total;
            }
        }
    }

    out.counts = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = share[out.batch.codes[i] * G + out.group.codes[i]];
        for (std::size_t g = 0; g < p; ++g) {
            double mean = out.lib_size[i] * s[g];
            out.counts(i, g) = mean > 0 ? static_cast<double>(std::poisson_distribution<long long>(mean)(rng)) : 0.0;
        }
    }
    return out;
}

/**
 * Library-size normalization followed by `log(1 + x)`: each row is rescaled to sum to `scale`.
 * All-zero rows stay zero.
 */
inline Matrix normalize_log1p_cpm(const Matrix& counts, double scale = 1e4) {
    Matrix out = counts;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        double total = 0;
        for (double v : row) {
            if (v < 0) {
                throw ValidationError("normalize: negative count in row " + std::to_string(i));
            }
            total += v;
        }
        for (auto& v : row) {
            v = total > 0 ? std::log1p(v / total * scale) : 0.0;
        }
    }
    return out;
}

}

#endif
