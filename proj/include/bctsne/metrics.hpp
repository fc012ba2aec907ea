#ifndef BCTSNE_METRICS_HPP
#define BCTSNE_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "boost/math/distributions/chi_squared.hpp"

#include "design.hpp"
#include "labels.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "tsne.hpp"

/**
 * @file metrics.hpp
 *
 * @brief Mixing and separation scores for embeddings: silhouette, kBET acceptance, LISI and PC regression.
 *
 * Rescaled scores share one orientation: 0 means the labeled groups are perfectly separated,
 * 1 means they are perfectly intermixed.
 */

namespace bctsne {

struct SilhouetteScore {
    /** Mean silhouette width in [-1, 1]. */
    double raw = 0;
    /** `(1 - raw) / 2`. */
    double rescaled = 0;
};

struct LisiScore {
    /** Mean inverse Simpson index, in [1, number of levels]. */
    double mean = 1;
    /** `(mean - 1) / (levels - 1)`, zero for a single level. */
    double rescaled = 0;
};

/**
 * Mean silhouette width under Euclidean distance.
 *
 * For each point, `a` is its mean distance to the rest of its own level and `b` the smallest mean
 * distance to another level; the width is `(b - a) / max(a, b)`. Points in singleton levels score 0.
 */
inline SilhouetteScore silhouette(const Matrix& Y, const Categorical& labels) {
    const std::size_t n = Y.rows(), L = labels.num_levels();
    if (labels.size() != n) {
        throw ValidationError("silhouette: label count does not match rows");
    }
    auto counts = labels.level_counts();
    if (L < 2 || std::none_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 2; })) {
        throw ValidationError("silhouette: need at least two levels and one level with two or more members");
    }

    std::vector<double> width(n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> sums(L);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(sums.begin(), sums.end(), 0.0);
            auto yi = Y.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    continue;
                }
                auto yj = Y.row(j);
                double d = 0;
                for (std::size_t c = 0; c < Y.cols(); ++c) {
                    double diff = yi[c] - yj[c];
                    d += diff * diff;
                }
                sums[labels.codes[j]] += std::sqrt(d);
            }

            const std::size_t own = labels.codes[i];
            if (counts[own] < 2) {
                width[i] = 0;
                continue;
            }
            double a = sums[own] / static_cast<double>(counts[own] - 1);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < L; ++l) {
                if (l != own && counts[l] > 0) {
                    b = std::min(b, sums[l] / static_cast<double>(counts[l]));
                }
            }
            double denom = std::max(a, b);
            width[i] = denom > 0 ? (b - a) / denom : 0.0;
        }
    });

    SilhouetteScore out;
    out.raw = std::accumulate(width.begin(), width.end(), 0.0) / static_cast<double>(n);
    out.rescaled = std::clamp((1.0 - out.raw) / 2.0, 0.0, 1.0);
    return out;
}

struct KbetOptions {
    /** Neighborhood size; zero picks `max(10, floor(0.05 n))`. */
    std::size_t knn = 0;
    /** Number of tested points; zero picks `min(500, n)`. */
    std::size_t n_test = 0;
    double alpha = 0.05;
    std::uint64_t seed = 42;

    std::size_t resolved_knn(std::size_t n) const { return knn ? knn : std::max<std::size_t>(10, n / 20); }
    std::size_t resolved_tests(std::size_t n) const { return n_test ? std::min(n_test, n) : std::min<std::size_t>(500, n); }
};

namespace internal {

// Indices of the k nearest neighbors of row i, self excluded, ties broken by index.
inline std::vector<std::size_t> nearest_neighbors(const Matrix& Y, std::size_t i, std::size_t k) {
    const std::size_t n = Y.rows();
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    auto yi = Y.row(i);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
            continue;
        }
        auto yj = Y.row(j);
        double d = 0;
        for (std::size_t c = 0; c < Y.cols(); ++c) {
            double diff = yi[c] - yj[c];
            d += diff * diff;
        }
        dist.emplace_back(d, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t m = 0; m < k; ++m) {
        out[m] = dist[m].second;
    }
    return out;
}

}

/**
 * kBET-style acceptance rate.
 *
 * For each sampled point, the batch counts among its `knn` nearest neighbors are compared with
 * the counts expected from the global batch proportions by a Pearson chi-squared test with
 * `levels - 1` degrees of freedom. Returns the fraction of tests with p-value at least `alpha`.
 */
inline double kbet_acceptance(const Matrix& Y, const Categorical& batch, const KbetOptions& opt = {}) {
    const std::size_t n = Y.rows(), L = batch.num_levels();
    if (batch.size() != n) {
        throw ValidationError("kbet: label count does not match rows");
    }
    if (L < 2) {
        throw ValidationError("kbet: batch variable '" + batch.name + "' has a single level");
    }
    const std::size_t knn = opt.resolved_knn(n);
    if (knn < 1 || knn >= n) {
        throw DomainError("kbet: neighborhood size " + std::to_string(knn) + " must lie in [1, " + std::to_string(n) + ")");
    }

    auto counts = batch.level_counts();
    std::vector<double> expected(L);
    bool any_large = false;
    for (std::size_t l = 0; l < L; ++l) {
        expected[l] = static_cast<double>(knn) * static_cast<double>(counts[l]) / static_cast<double>(n);
        any_large = any_large || expected[l] >= 1;
    }
    if (!any_large) {
        throw DomainError("kbet: neighborhood size " + std::to_string(knn) +
                          " too small, every expected batch count is below 1");
    }

    std::vector<std::size_t> tested(n);
    std::iota(tested.begin(), tested.end(), std::size_t{0});
    const std::size_t ntest = opt.resolved_tests(n);
    if (ntest < n) {
        std::mt19937_64 rng(opt.seed);
        std::shuffle(tested.begin(), tested.end(), rng);
        tested.resize(ntest);
        std::sort(tested.begin(), tested.end());
    }

    boost::math::chi_squared dist(static_cast<double>(L - 1));
    std::vector<char> accepted(ntest);
    parallel_rows(ntest, [&](std::size_t begin, std::size_t end) {
        std::vector<double> observed(L);
        for (std::size_t t = begin; t < end; ++t) {
            std::fill(observed.begin(), observed.end(), 0.0);
            for (auto j : internal::nearest_neighbors(Y, tested[t], knn)) {
                observed[batch.codes[j]] += 1;
            }
            double stat = 0;
            for (std::size_t l = 0; l < L; ++l) {
                if (expected[l] > 0) {
                    double d = observed[l] - expected[l];
                    stat += d * d / expected[l];
                }
            }
            double pval = boost::math::cdf(boost::math::complement(dist, stat));
            accepted[t] = pval >= opt.alpha;
        }
    });

    double hits = static_cast<double>(std::count(accepted.begin(), accepted.end(), 1));
    return hits / static_cast<double>(ntest);
}

/**
 * Local inverse Simpson index.
 *
 * Neighbor weights are the perplexity-calibrated Gaussian conditionals used for t-SNE input affinities.
 * Each point's score is `1 / sum_l (weight of label l)^2`.
 */
inline LisiScore lisi(const Matrix& Y, const Categorical& labels, double perplexity = 30) {
    const std::size_t n = Y.rows(), L = labels.num_levels();
    if (labels.size() != n) {
        throw ValidationError("lisi: label count does not match rows");
    }
    if (!(perplexity < static_cast<double>(n))) {
        throw DomainError("lisi: perplexity must be below the number of points");
    }

    Matrix D = pairwise_sqdist(Y);
    auto sigma2 = calibrate_bandwidths(D, perplexity);
    Matrix cond = gaussian_conditionals(D, sigma2);

    std::vector<double> scores(n);
    parallel_rows(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> mass(L);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(mass.begin(), mass.end(), 0.0);
            auto row = cond.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                mass[labels.codes[j]] += row[j];
            }
            double simpson = 0;
            for (double m : mass) {
                simpson += m * m;
            }
            scores[i] = 1.0 / simpson;
        }
    });

    LisiScore out;
    out.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(n);
    out.rescaled = L > 1 ? std::clamp((out.mean - 1.0) / static_cast<double>(L - 1), 0.0, 1.0) : 0.0;
    return out;
}

/**
 * Variance-weighted R^2 of the principal components of `M` regressed on the label dummies
 * (with intercept): `sum_k var_k R2_k / sum_k var_k` over all components.
 */
inline double pc_regression(const Matrix& M, const Categorical& labels) {
    const std::size_t n = M.rows();
    if (labels.size() != n) {
        throw ValidationError("pc_regression: label count does not match rows");
    }
    if (labels.num_levels() < 2) {
        throw ValidationError("pc_regression: labeling '" + labels.name + "' has a single level");
    }
    if (labels.num_levels() >= n) {
        throw ValidationError("pc_regression: more label levels than the regression can support");
    }

    Matrix centered = M;
    auto c = centered.eigen();
    c.rowwise() -= c.colwise().mean();
    if (!(c.squaredNorm() > 0)) {
        throw ValidationError("pc_regression: input has zero variance");
    }

    LabelTable table;
    table.columns.push_back(labels);
    BatchDesign design = build_design(table, {.intercept = true, .prune = false});

    const std::size_t rank = std::min(n, M.cols());
    SvdResult svd = truncated_svd(centered, rank);
    double weighted = 0, total = 0;
    for (std::size_t k = 0; k < rank; ++k) {
        double var = svd.S[k] * svd.S[k];
        if (var <= 0) {
            continue;
        }
        Matrix pc(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            pc(i, 0) = svd.U(i, k) * svd.S[k];
        }
        Matrix resid = residualize(design.Z, pc);
        double r2 = 1.0 - resid.eigen().squaredNorm() / var;
        weighted += var * std::clamp(r2, 0.0, 1.0);
        total += var;
    }
    return total > 0 ? weighted / total : 0.0;
}

/**
 * @brief All four scores for one labeling of one embedding.
 */
struct LabelingMetrics {
    std::string labeling;
    std::size_t levels = 0;
    double sil_raw = 0;
    double sil_rescaled = 0;
    double kbet_acceptance = 0;
    double lisi_mean = 1;
    double lisi_rescaled = 0;
    double pcreg_r2 = 0;
};

struct EvaluateOptions {
    KbetOptions kbet;
    double lisi_perplexity = 30;
};

struct MetricsReport {
    std::vector<LabelingMetrics> rows;
    std::size_t knn = 0;
    std::size_t n_test = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    double lisi_perplexity = 30;
};

inline MetricsReport evaluate(const Matrix& Y, const std::vector<Categorical>& labelings, const EvaluateOptions& opt = {}) {
    MetricsReport report;
    report.knn = opt.kbet.resolved_knn(Y.rows());
    report.n_test = opt.kbet.resolved_tests(Y.rows());
    report.alpha = opt.kbet.alpha;
    report.seed = opt.kbet.seed;
    report.lisi_perplexity = std::min(opt.lisi_perplexity, static_cast<double>(Y.rows() - 1));

    for (const auto& lab : labelings) {
        LabelingMetrics row;
        row.labeling = lab.name;
        row.levels = lab.num_levels();
        auto sil = silhouette(Y, lab);
        row.sil_raw = sil.raw;
        row.sil_rescaled = sil.rescaled;
        row.kbet_acceptance = kbet_acceptance(Y, lab, opt.kbet);
        auto li = lisi(Y, lab, report.lisi_perplexity);
        row.lisi_mean = li.mean;
        row.lisi_rescaled = li.rescaled;
        row.pcreg_r2 = pc_regression(Y, lab);
        report.rows.push_back(row);
    }
    return report;
}

/// Fixed-width text table, one line per labeling.
inline std::string format_report(const MetricsReport& report) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-16s %8s %8s %8s %8s %8s %8s\n", "labeling", "SIL", "SIL(r)", "kBET", "LISI",
                  "LISI(r)", "PcReg");
    out += buf;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-16s %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n", r.labeling.c_str(), r.sil_raw,
                      r.sil_rescaled, r.kbet_acceptance, r.lisi_mean, r.lisi_rescaled, r.pcreg_r2);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "(kBET k=%zu, tests=%zu, alpha=%.3g, seed=%llu; LISI perplexity=%.3g)\n", report.knn,
                  report.n_test, report.alpha, static_cast<unsigned long long>(report.seed), report.lisi_perplexity);
    out += buf;
    return out;
}

}

#endif
