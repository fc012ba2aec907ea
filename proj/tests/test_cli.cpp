#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bctsne/io.hpp"
#include "bctsne/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status = -1;
    std::string err;
};

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("bctsne_cli_" + std::string(
                                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Outcome run(const std::string& args) const {
        std::string cmd = "cd '" + dir_.string() + "' && '" + BCTSNE_CLI_PATH + "' " + args + " > stdout.txt 2> stderr.txt";
        int raw = std::system(cmd.c_str());
        Outcome out;
        out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        out.err = slurp(path("stderr.txt"));
        return out;
    }

    void generate_small() const {
        ASSERT_EQ(run("generate --n-cells 96 --n-genes 150 --seed 3").status, 0);
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

std::size_t lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}

TEST_F(CliTest, GenerateDefaultsAndSeedRepeat) {
    ASSERT_EQ(run("generate").status, 0);
    auto counts = bctsne::read_matrix_csv(path("counts.csv"));
    EXPECT_EQ(counts.values.rows(), 800u);
    EXPECT_EQ(counts.values.cols(), 2000u);
    auto labels = bctsne::read_labels_csv(path("labels.csv"));
    EXPECT_EQ(labels.columns.size(), 2u);

    ASSERT_EQ(run("generate --n-cells 64 --n-genes 50 --seed 9 --counts a.csv --labels la.csv").status, 0);
    ASSERT_EQ(run("generate --n-cells 64 --n-genes 50 --seed 9 --counts b.csv --labels lb.csv").status, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("la.csv")), slurp(path("lb.csv")));
}

TEST_F(CliTest, GenerateRejectsInvalidCombination) {
    auto r = run("generate --n-cells 10 --n-batches 4 --n-groups 4");
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.err.rfind("error: usage:", 0), 0u);
    EXPECT_EQ(lines(r.err), 1u);
    EXPECT_EQ(run("generate --n-cells -3").status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
}

TEST_F(CliTest, EmbedRequiresBatchVarsUnlessUncorrected) {
    generate_small();
    auto r = run("embed --matrix counts.csv --labels labels.csv");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("--batch-vars"), std::string::npos);
    EXPECT_EQ(lines(r.err), 1u);
}

TEST_F(CliTest, EmbedUnknownBatchVariable) {
    generate_small();
    auto r = run("embed --matrix counts.csv --labels labels.csv --batch-vars donor --iters 10 --perplexity 5");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("donor"), std::string::npos);
    EXPECT_EQ(lines(r.err), 1u);
}

TEST_F(CliTest, EmbedConfoundedDesignSuggestsPruning) {
    generate_small();
    // A second column identical to batch under a different name.
    auto labels = bctsne::read_labels_csv(path("labels.csv"));
    auto copy = labels.column("batch");
    copy.name = "lane";
    labels.columns.push_back(copy);
    bctsne::write_labels_csv(labels, path("labels2.csv"));

    auto r = run("embed --matrix counts.csv --labels labels2.csv --batch-vars batch,lane --iters 20 --perplexity 5");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("--prune"), std::string::npos);
    EXPECT_EQ(lines(r.err), 1u);

    r = run("embed --matrix counts.csv --labels labels2.csv --batch-vars batch,lane --iters 20 --perplexity 5 --prune");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, EmbedThreeDimensionsAndTrace) {
    generate_small();
    ASSERT_EQ(run("embed --matrix counts.csv --labels labels.csv --batch-vars batch --dims 3 --iters 120 "
                  "--perplexity 10 --normalize --out e3.csv --trace t3.csv")
                  .status,
              0);
    auto emb = bctsne::read_matrix_csv(path("e3.csv"));
    EXPECT_EQ(emb.col_names, (std::vector<std::string>{"y1", "y2", "y3"}));
    EXPECT_EQ(lines(slurp(path("t3.csv"))), 1u + 3u);
    EXPECT_EQ(run("embed --matrix counts.csv --no-correction --dims 4").status, 2);
}

TEST_F(CliTest, UncorrectedRunMatchesLibrary) {
    generate_small();
    ASSERT_EQ(run("embed --matrix counts.csv --no-correction --normalize --iters 150 --perplexity 10 --seed 5 "
                  "--out cli.csv")
                  .status,
              0);

    auto data = bctsne::read_matrix_csv(path("counts.csv"));
    bctsne::EmbedOptions opt;
    opt.correction = false;
    opt.normalize = true;
    opt.tsne.iterations = 150;
    opt.tsne.perplexity = 10;
    opt.tsne.seed = 5;
    opt.reduce.seed = 5;
    auto res = bctsne::embed(data, nullptr, opt);
    bctsne::write_embedding_csv(res.result.state, data.row_ids, path("lib.csv"));
    EXPECT_EQ(slurp(path("cli.csv")), slurp(path("lib.csv")));
}

TEST_F(CliTest, EvaluateAndPlot) {
    generate_small();
    ASSERT_EQ(run("embed --matrix counts.csv --labels labels.csv --batch-vars batch --iters 100 --perplexity 10 "
                  "--normalize --out emb.csv")
                  .status,
              0);
    ASSERT_EQ(run("evaluate --embedding emb.csv --labels labels.csv --out report.csv").status, 0);
    auto report = slurp(path("report.csv"));
    EXPECT_EQ(report.rfind("labeling,metric,raw,rescaled\n", 0), 0u);
    EXPECT_EQ(lines(report), 1u + 2u * 4u);
    EXPECT_NE(slurp(path("stdout.txt")).find("PcReg"), std::string::npos);

    ASSERT_EQ(run("plot --embedding emb.csv --labels labels.csv --color-by group --shape-by batch --out p.svg").status, 0);
    auto svg = slurp(path("p.svg"));
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    ASSERT_EQ(run("plot --embedding emb.csv --labels labels.csv --color-by group --shape-by batch --out q.svg").status, 0);
    EXPECT_EQ(svg, slurp(path("q.svg")));

    EXPECT_EQ(run("plot --embedding emb.csv --color-by group --out r.svg").status, 2);
    EXPECT_EQ(run("evaluate --embedding emb.csv --labels labels.csv --labelings tissue").status, 1);
}

TEST_F(CliTest, PipelineWritesManifestAndIsDeterministic) {
    std::ofstream(path("cfg.txt")) << "# small run\nout_dir = run1\nseed = 2\nn_cells = 96\nn_genes = 200\n"
                                      "iters = 150\nperplexity = 10\n";
    ASSERT_EQ(run("pipeline cfg.txt").status, 0);
    std::ofstream(path("cfg2.txt")) << "out_dir = run2\nseed = 2\nn_cells = 96\nn_genes = 200\niters = 150\nperplexity = 10\n";
    ASSERT_EQ(run("pipeline cfg2.txt").status, 0);

    auto manifest = slurp(path("run1/manifest.tsv"));
    for (const char* f : {"counts.csv", "labels.csv", "embedding_uncorrected.csv", "embedding_corrected.csv",
                          "trace_corrected.csv", "report_corrected.csv", "plot_uncorrected.svg", "plot_corrected.svg"}) {
        EXPECT_NE(manifest.find(f), std::string::npos) << f;
        EXPECT_EQ(slurp(path(std::string("run1/") + f)), slurp(path(std::string("run2/") + f))) << f;
    }
    EXPECT_EQ(manifest, slurp(path("run2/manifest.tsv")));
}

TEST_F(CliTest, PipelineRejectsUnknownKeys) {
    std::ofstream(path("bad.txt")) << "out_dir = x\nperplexty = 10\n";
    auto r = run("pipeline bad.txt");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("perplexty"), std::string::npos);
    EXPECT_EQ(run("pipeline missing.txt").status, 1);
}
