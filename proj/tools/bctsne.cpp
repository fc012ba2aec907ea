// Command-line front end: generate, embed, evaluate, plot, pipeline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "bctsne/bctsne.hpp"

namespace fs = std::filesystem;
using namespace bctsne;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string one_line(std::string s) {
    for (auto& c : s) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(path + ": cannot open file for hashing");
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char two[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(two, sizeof(two), "%02x", digest[i]);
        hex += two;
    }
    return hex;
}

void write_text(const std::string& path, const std::string& text) {
    auto parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ValidationError(path + ": cannot open file for writing");
    }
    out << text;
}

void check_sim(const SimSpec& spec) {
    if (spec.n_cells < spec.n_batches * spec.n_groups) {
        throw UsageError("--n-cells must be at least --n-batches x --n-groups so every combination is populated");
    }
    spec.validate();
}

void run_generate(const SimSpec& spec, const std::string& counts_path, const std::string& labels_path, bool binary) {
    check_sim(spec);
    SimOutput sim = simulate(spec);
    DataMatrix m;
    m.values = std::move(sim.counts);
    m.row_ids = sim.cell_ids;
    m.col_names = sim.gene_ids;
    write_matrix_csv(m, counts_path);
    if (binary) {
        write_matrix_binary(m, fs::path(counts_path).replace_extension(".bcm").string());
    }
    write_labels_csv(sim.labels(), labels_path);
    std::printf("simulated %zu cells x %zu genes, %zu batches, %zu groups (batch sd %.3g, group sd %.3g, DE prob %.3g, seed %llu)\n",
                spec.n_cells, spec.n_genes, spec.n_batches, spec.n_groups, spec.batch_effect_sd, spec.group_effect_sd,
                spec.de_prob, static_cast<unsigned long long>(spec.seed));
    std::printf("counts: %s\nlabels: %s\n", counts_path.c_str(), labels_path.c_str());
}

void run_embed(const EmbedOptions& opt, const std::string& matrix_path, const std::string& labels_path,
               const std::string& out_path, const std::string& trace_path) {
    DataMatrix data = read_matrix(matrix_path);
    std::optional<LabelTable> labels;
    if (!labels_path.empty()) {
        labels = read_labels_csv(labels_path);
    }
    EmbedOutput res;
    try {
        res = embed(data, labels ? &*labels : nullptr, opt);
    } catch (const CollinearityError& e) {
        throw ValidationError(std::string(e.what()) + "; rerun with --prune to keep a reduced design");
    }
    if (res.design && !res.design->absorbed.empty()) {
        std::string list;
        for (const auto& a : res.design->absorbed) {
            list += (list.empty() ? "" : ", ") + a;
        }
        std::fprintf(stderr, "warning: design columns absorbed by earlier variables and dropped: %s\n", list.c_str());
    }
    write_embedding_csv(res.result.state, data.row_ids, out_path);
    if (!trace_path.empty()) {
        write_loss_trace(res.result.trace, trace_path);
    }
    const auto& last = res.result.trace.back();
    std::printf("embedded %zu cells into %zu dims (%s, k=%zu): final KL %.6f", data.values.rows(), opt.tsne.dims,
                opt.correction ? (opt.projection ? "batch-corrected" : "linear correction only") : "uncorrected",
                res.reduced.k, last.kl_loss);
    if (!std::isnan(last.orthogonality_maxabs)) {
        std::printf(", max|Z'Y| %.3g", last.orthogonality_maxabs);
    }
    std::printf("\nembedding: %s\n", out_path.c_str());
}

MetricsReport run_evaluate(const std::string& embedding_path, const std::string& labels_path,
                           const std::vector<std::string>& labelings, const EvaluateOptions& opt,
                           const std::string& out_path) {
    DataMatrix emb = read_matrix(embedding_path);
    LabelTable labels = read_labels_csv(labels_path).align_to(emb.row_ids);
    std::vector<std::string> names = labelings;
    if (names.empty()) {
        for (const auto& c : labels.columns) {
            names.push_back(c.name);
        }
    }
    std::vector<Categorical> cols;
    for (const auto& n : names) {
        cols.push_back(labels.column(n));
    }
    MetricsReport report = evaluate(emb.values, cols, opt);
    if (!out_path.empty()) {
        write_report_csv(report, out_path);
    }
    std::fputs(format_report(report).c_str(), stdout);
    return report;
}

void run_plot(const std::string& embedding_path, const std::string& labels_path, const std::string& color_by,
              const std::string& shape_by, const std::string& title, const std::string& out_path) {
    DataMatrix emb = read_matrix(embedding_path);
    std::optional<LabelTable> labels;
    if (!labels_path.empty()) {
        labels = read_labels_csv(labels_path).align_to(emb.row_ids);
    } else if (!color_by.empty() || !shape_by.empty()) {
        throw UsageError("--color-by/--shape-by need --labels");
    }
    const Categorical* color = color_by.empty() ? nullptr : &labels->column(color_by);
    const Categorical* shape = shape_by.empty() ? nullptr : &labels->column(shape_by);
    SvgPlot plot = render_scatter_svg(emb.values, color, shape, {.title = title});
    for (const auto& w : plot.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    write_text(out_path, plot.svg);
    std::printf("plot: %s\n", out_path.c_str());
}

void run_pipeline(const std::string& config_path) {
    KeyValueConfig cfg = KeyValueConfig::load(config_path);
    fs::path dir = cfg.get("out_dir", "bctsne_out");
    std::uint64_t seed = cfg.get_count("seed", 1);

    SimSpec spec;
    spec.n_cells = cfg.get_count("n_cells", spec.n_cells);
    spec.n_genes = cfg.get_count("n_genes", spec.n_genes);
    spec.n_batches = cfg.get_count("n_batches", spec.n_batches);
    spec.n_groups = cfg.get_count("n_groups", spec.n_groups);
    spec.batch_effect_sd = cfg.get_double("batch_effect_sd", spec.batch_effect_sd);
    spec.group_effect_sd = cfg.get_double("group_effect_sd", spec.group_effect_sd);
    spec.de_prob = cfg.get_double("de_prob", spec.de_prob);
    spec.lib_size_location = cfg.get_double("lib_size_location", spec.lib_size_location);
    spec.lib_size_scale = cfg.get_double("lib_size_scale", spec.lib_size_scale);
    spec.seed = seed;

    EmbedOptions eo;
    eo.batch_vars = cfg.get_list("batch_vars", {"batch"});
    eo.normalize = cfg.get_bool("normalize", true);
    eo.prune = cfg.get_bool("prune", false);
    eo.reduce.k = cfg.get_count("k", 0);
    eo.reduce.scale = cfg.get_bool("scale", false);
    eo.reduce.seed = seed;
    eo.tsne.perplexity = cfg.get_double("perplexity", eo.tsne.perplexity);
    eo.tsne.iterations = cfg.get_count("iters", eo.tsne.iterations);
    eo.tsne.eta = cfg.get_double("eta", eo.tsne.eta);
    eo.tsne.exaggeration = cfg.get_double("exaggeration", eo.tsne.exaggeration);
    eo.tsne.exaggeration_iters = cfg.get_count("exaggeration_iters", eo.tsne.exaggeration_iters);
    eo.tsne.dims = cfg.get_count("dims", eo.tsne.dims);
    eo.tsne.seed = seed;

    EvaluateOptions ev;
    ev.kbet.knn = cfg.get_count("knn", 0);
    ev.kbet.n_test = cfg.get_count("n_test", 0);
    ev.kbet.alpha = cfg.get_double("alpha", ev.kbet.alpha);
    ev.kbet.seed = cfg.get_count("metric_seed", seed);
    ev.lisi_perplexity = cfg.get_double("lisi_perplexity", ev.lisi_perplexity);
    auto labelings = cfg.get_list("labelings", {"batch", "group"});
    std::string color_by = cfg.get("color_by", "group"), shape_by = cfg.get("shape_by", "batch");

    auto unused = cfg.unused();
    if (!unused.empty()) {
        std::string list;
        for (const auto& u : unused) {
            list += (list.empty() ? "" : ", ") + u;
        }
        throw UsageError("unknown config key(s): " + list);
    }

    std::vector<std::string> outputs;
    auto path = [&](const std::string& name) {
        outputs.push_back(name);
        return (dir / name).string();
    };

    run_generate(spec, path("counts.csv"), path("labels.csv"), false);
    for (bool corrected : {false, true}) {
        std::string tag = corrected ? "corrected" : "uncorrected";
        EmbedOptions o = eo;
        o.correction = corrected;
        std::string emb = path("embedding_" + tag + ".csv");
        run_embed(o, (dir / "counts.csv").string(), (dir / "labels.csv").string(), emb, path("trace_" + tag + ".csv"));
        run_evaluate(emb, (dir / "labels.csv").string(), labelings, ev, path("report_" + tag + ".csv"));
        run_plot(emb, (dir / "labels.csv").string(), color_by, shape_by,
                 corrected ? "Batch-corrected t-SNE" : "Unadjusted t-SNE", path("plot_" + tag + ".svg"));
    }

    std::string manifest = "file\tbytes\tsha256\n";
    for (const auto& name : outputs) {
        auto full = (dir / name).string();
        manifest += name + "\t" + std::to_string(fs::file_size(full)) + "\t" + sha256_file(full) + "\n";
    }
    write_text((dir / "manifest.tsv").string(), manifest);
    std::printf("manifest: %s\n", (dir / "manifest.tsv").string().c_str());
}

}

int main(int argc, char** argv) {
    CLI::App app{"Batch-corrected t-SNE: simulate, embed, evaluate and plot"};
    app.require_subcommand(1);

    // generate
    SimSpec spec;
    std::string gen_counts = "counts.csv", gen_labels = "labels.csv";
    bool gen_binary = false;
    auto* gen = app.add_subcommand("generate", "Simulate a count matrix with batch and cell-type structure");
    gen->add_option("--n-cells", spec.n_cells, "Number of cells")->check(CLI::PositiveNumber);
    gen->add_option("--n-genes", spec.n_genes, "Number of genes")->check(CLI::PositiveNumber);
    gen->add_option("--n-batches", spec.n_batches, "Number of batches")->check(CLI::PositiveNumber);
    gen->add_option("--n-groups", spec.n_groups, "Number of cell types")->check(CLI::PositiveNumber);
    gen->add_option("--batch-sd", spec.batch_effect_sd, "Log-scale SD of batch factors")->check(CLI::NonNegativeNumber);
    gen->add_option("--group-sd", spec.group_effect_sd, "Log-scale SD of cell-type factors")->check(CLI::NonNegativeNumber);
    gen->add_option("--de-prob", spec.de_prob, "Fraction of genes differentially expressed per cell type")
        ->check(CLI::Range(0.0, 1.0));
    gen->add_option("--lib-loc", spec.lib_size_location, "Log-normal location of library sizes");
    gen->add_option("--lib-scale", spec.lib_size_scale, "Log-normal scale of library sizes")->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", spec.seed, "Random seed");
    gen->add_option("--counts", gen_counts, "Output count matrix (CSV)");
    gen->add_option("--labels", gen_labels, "Output labels (CSV)");
    gen->add_flag("--binary", gen_binary, "Also write a .bcm binary cache next to the counts");

    // embed
    EmbedOptions eo;
    std::string emb_matrix, emb_labels, emb_batch, emb_out = "embedding.csv", emb_trace;
    bool no_correction = false, no_projection = false;
    auto* emb = app.add_subcommand("embed", "Compute a (batch-corrected) t-SNE embedding");
    emb->add_option("--matrix", emb_matrix, "Input matrix (CSV/TSV or .bcm)")->required();
    emb->add_option("--labels", emb_labels, "Label file (CSV/TSV)");
    emb->add_option("--batch-vars", emb_batch, "Comma-separated batch variables");
    emb->add_option("--k", eo.reduce.k, "Reduced components (default 30, or 50 above 1000 cells)");
    emb->add_option("--perplexity", eo.tsne.perplexity, "Perplexity")->check(CLI::PositiveNumber);
    emb->add_option("--iters", eo.tsne.iterations, "Iterations")->check(CLI::PositiveNumber);
    emb->add_option("--eta", eo.tsne.eta, "Learning rate")->check(CLI::PositiveNumber);
    emb->add_option("--seed", eo.tsne.seed, "Random seed");
    emb->add_option("--exaggeration", eo.tsne.exaggeration, "Early exaggeration factor (1 disables)")
        ->check(CLI::PositiveNumber);
    emb->add_option("--exaggeration-iters", eo.tsne.exaggeration_iters, "Early exaggeration duration");
    emb->add_option("--dims", eo.tsne.dims, "Embedding dimension (2 or 3)")->check(CLI::IsMember({2, 3}));
    emb->add_flag("--no-correction", no_correction, "Plain PCA + t-SNE");
    emb->add_flag("--no-projection", no_projection, "Linear pre-correction only, no per-iteration projection");
    emb->add_flag("--normalize", eo.normalize, "Library-size normalize and log1p the input first");
    emb->add_flag("--scale", eo.reduce.scale, "Scale features to unit variance before PCA");
    emb->add_flag("--prune", eo.prune, "Drop confounded design columns instead of failing");
    emb->add_option("--out", emb_out, "Output embedding CSV");
    emb->add_option("--trace", emb_trace, "Output loss trace CSV");

    // evaluate
    EvaluateOptions ev;
    std::string ev_embedding, ev_labels, ev_labelings, ev_out;
    auto* eval = app.add_subcommand("evaluate", "Score batch mixing and cell-type separation");
    eval->add_option("--embedding", ev_embedding, "Embedding CSV")->required();
    eval->add_option("--labels", ev_labels, "Label file")->required();
    eval->add_option("--labelings", ev_labelings, "Comma-separated label columns (default: all)");
    eval->add_option("--knn", ev.kbet.knn, "kBET neighborhood size (default max(10, 5% of n))");
    eval->add_option("--n-test", ev.kbet.n_test, "kBET tested points (default min(500, n))");
    eval->add_option("--alpha", ev.kbet.alpha, "kBET significance level")->check(CLI::Range(0.0, 1.0));
    eval->add_option("--seed", ev.kbet.seed, "kBET sampling seed");
    eval->add_option("--lisi-perplexity", ev.lisi_perplexity, "LISI perplexity")->check(CLI::PositiveNumber);
    eval->add_option("--out", ev_out, "Output report CSV");

    // plot
    std::string pl_embedding, pl_labels, pl_color, pl_shape, pl_title, pl_out = "embedding.svg";
    auto* plot = app.add_subcommand("plot", "Render an embedding as an SVG scatter plot");
    plot->add_option("--embedding", pl_embedding, "Embedding CSV")->required();
    plot->add_option("--labels", pl_labels, "Label file");
    plot->add_option("--color-by", pl_color, "Label column mapped to color");
    plot->add_option("--shape-by", pl_shape, "Label column mapped to marker shape");
    plot->add_option("--title", pl_title, "Plot title");
    plot->add_option("--out", pl_out, "Output SVG");

    // pipeline
    std::string pipe_config;
    auto* pipe = app.add_subcommand("pipeline", "generate -> embed (uncorrected, corrected) -> evaluate -> plot");
    pipe->add_option("config", pipe_config, "key=value configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s\n", one_line(e.what()).c_str());
        return 2;
    }

    try {
        if (*gen) {
            run_generate(spec, gen_counts, gen_labels, gen_binary);
        } else if (*emb) {
            eo.correction = !no_correction;
            eo.projection = !no_projection;
            eo.batch_vars = split_list(emb_batch);
            if (eo.correction && eo.batch_vars.empty()) {
                throw UsageError("--batch-vars is required unless --no-correction is given");
            }
            if (eo.correction && emb_labels.empty()) {
                throw UsageError("--labels is required unless --no-correction is given");
            }
            eo.reduce.seed = eo.tsne.seed;
            run_embed(eo, emb_matrix, emb_labels, emb_out, emb_trace);
        } else if (*eval) {
            run_evaluate(ev_embedding, ev_labels, split_list(ev_labelings), ev, ev_out);
        } else if (*plot) {
            run_plot(pl_embedding, pl_labels, pl_color, pl_shape, pl_title, pl_out);
        } else if (*pipe) {
            run_pipeline(pipe_config);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: usage: %s\n", one_line(e.what()).c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", one_line(e.what()).c_str());
        return 1;
    }
    return 0;
}
