#include <gtest/gtest.h>

#include <cmath>

#include "bctsne/metrics.hpp"
#include "bctsne/reduce.hpp"
#include "bctsne/run.hpp"
#include "bctsne/synthgen.hpp"

using bctsne::Matrix;
using bctsne::SimSpec;

namespace {

SimSpec small(double batch_sd, double group_sd, std::uint64_t seed = 1) {
    SimSpec s;
    s.n_cells = 400;
    s.n_genes = 500;
    s.batch_effect_sd = batch_sd;
    s.group_effect_sd = group_sd;
    s.seed = seed;
    return s;
}

Matrix pca_scores(const bctsne::SimOutput& sim, std::size_t k = 20) {
    return bctsne::pca_reduce(bctsne::normalize_log1p_cpm(sim.counts), {.k = k}).X_hat;
}

}

TEST(Simulate, DeterministicPerSeed) {
    auto a = bctsne::simulate(small(0.6, 0.7, 3));
    auto b = bctsne::simulate(small(0.6, 0.7, 3));
    auto c = bctsne::simulate(small(0.6, 0.7, 4));
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, c.counts);
}

TEST(Simulate, ShapesLabelsAndIntegralCounts) {
    auto sim = bctsne::simulate(small(0.6, 0.7));
    EXPECT_EQ(sim.counts.rows(), 400u);
    EXPECT_EQ(sim.counts.cols(), 500u);
    EXPECT_EQ(sim.cell_ids.front(), "Cell001");
    EXPECT_EQ(sim.gene_ids.back(), "Gene500");
    for (double v : sim.counts.values()) {
        ASSERT_GE(v, 0.0);
        ASSERT_EQ(v, std::floor(v));
    }
    EXPECT_EQ(sim.batch.level_counts(), (std::vector<std::size_t>{100, 100, 100, 100}));
    EXPECT_EQ(sim.group.level_counts(), (std::vector<std::size_t>{100, 100, 100, 100}));
    EXPECT_EQ(sim.batch.levels.front(), "Batch1");
    EXPECT_EQ(sim.group.levels.back(), "Group4");

    // Every batch/group combination is equally represented.
    std::vector<std::size_t> combos(16);
    for (std::size_t i = 0; i < 400; ++i) {
        ++combos[sim.batch.codes[i] * 4 + sim.group.codes[i]];
    }
    for (auto c : combos) {
        EXPECT_EQ(c, 25u);
    }
    EXPECT_EQ(sim.labels().columns.size(), 2u);
}

TEST(Simulate, NoEffectsLeaveBatchesExchangeable) {
    auto sim = bctsne::simulate(small(0.0, 0.0));
    double acc = bctsne::kbet_acceptance(pca_scores(sim), sim.batch);
    EXPECT_GE(acc, 0.85);
}

TEST(Simulate, StrongGroupsWithoutBatchEffectMixBatches) {
    auto sim = bctsne::simulate(small(0.0, 1.5));
    bctsne::OptimizerConfig cfg;
    cfg.iterations = 500;
    auto Y = bctsne::run_tsne(pca_scores(sim), cfg).state.Y;
    auto group = bctsne::silhouette(Y, sim.group);
    auto batch = bctsne::lisi(Y, sim.batch);
    EXPECT_GT(group.raw, 0.5);
    EXPECT_GT(batch.mean, 0.85 * 4);
}

TEST(Simulate, BatchSignalGrowsWithBatchEffect) {
    double prev = -1;
    for (double sd : {0.0, 0.3, 0.6}) {
        auto sim = bctsne::simulate(small(sd, 0.7));
        double r2 = bctsne::pc_regression(pca_scores(sim), sim.batch);
        EXPECT_GE(r2, prev) << "batch sd " << sd;
        prev = r2;
    }
}

TEST(Simulate, RejectsInvalidSpecs) {
    SimSpec s;
    s.n_batches = 0;
    EXPECT_THROW(bctsne::simulate(s), bctsne::ValidationError);
    s = SimSpec{};
    s.de_prob = 1.5;
    EXPECT_THROW(bctsne::simulate(s), bctsne::ValidationError);
    s = SimSpec{};
    s.batch_effect_sd = -1;
    EXPECT_THROW(bctsne::simulate(s), bctsne::ValidationError);
}

TEST(Normalize, HandExamples) {
    Matrix one = {{1, 1}};
    auto n1 = bctsne::normalize_log1p_cpm(one);
    EXPECT_DOUBLE_EQ(n1(0, 0), std::log1p(5000.0));
    EXPECT_DOUBLE_EQ(n1(0, 1), std::log1p(5000.0));

    Matrix zero_gene = {{0, 3, 1}, {0, 2, 2}};
    auto n2 = bctsne::normalize_log1p_cpm(zero_gene);
    EXPECT_EQ(n2(0, 0), 0.0);
    EXPECT_EQ(n2(1, 0), 0.0);

    EXPECT_THROW(bctsne::normalize_log1p_cpm(Matrix{{-1, 2}}), bctsne::ValidationError);
    EXPECT_EQ(bctsne::normalize_log1p_cpm(Matrix{{0, 0}}), (Matrix{{0, 0}}));
}

TEST(Normalize, RowsSumToScale) {
    auto sim = bctsne::simulate(small(0.6, 0.7, 9));
    auto norm = bctsne::normalize_log1p_cpm(sim.counts);
    for (std::size_t i = 0; i < norm.rows(); ++i) {
        double total = 0;
        for (double v : norm.row(i)) {
            total += std::expm1(v);
        }
        EXPECT_NEAR(total, 1e4, 1e-8);
    }
}
