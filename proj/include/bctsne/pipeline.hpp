#ifndef BCTSNE_PIPELINE_HPP
#define BCTSNE_PIPELINE_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "design.hpp"
#include "io.hpp"
#include "labels.hpp"
#include "metrics.hpp"
#include "plot.hpp"
#include "reduce.hpp"
#include "run.hpp"
#include "synthgen.hpp"

/**
 * @file pipeline.hpp
 *
 * @brief End-to-end steps shared by the command-line tool: embedding with or without batch correction,
 * plus the flat `key=value` configuration format.
 */

namespace bctsne {

struct EmbedOptions {
    /** Batch variables (label columns) entering the design; ignored without correction. */
    std::vector<std::string> batch_vars;
    /** Linear pre-correction of the reduced scores and per-iteration projection. */
    bool correction = true;
    /** With correction on, setting this to false keeps only the linear pre-correction. */
    bool projection = true;
    /** Drop design columns absorbed by earlier ones instead of failing. */
    bool prune = false;
    /** Apply library-size normalization and log1p before reduction. */
    bool normalize = false;

    ReduceOptions reduce;
    OptimizerConfig tsne;
};

struct EmbedOutput {
    ReducedData reduced;
    std::optional<BatchDesign> design;
    TsneResult result;
};

/**
 * Reduction followed by t-SNE.
 *
 * Without correction the data go through plain PCA and an unconstrained optimizer.
 * With correction, the batch design built from `batch_vars` is used both to residualize the
 * PCA scores and, unless disabled, to project every iterate.
 */
inline EmbedOutput embed(const DataMatrix& data, const LabelTable* labels, const EmbedOptions& opt,
                         const IterationObserver& observer = {}) {
    EmbedOutput out;
    Matrix X = opt.normalize ? normalize_log1p_cpm(data.values) : data.values;

    if (!opt.correction) {
        out.reduced = pca_reduce(X, opt.reduce);
        out.result = run_tsne(out.reduced.X_hat, opt.tsne, nullptr, observer);
        return out;
    }

    if (opt.batch_vars.empty()) {
        throw ValidationError("batch correction requires at least one batch variable");
    }
    if (!labels) {
        throw ValidationError("batch correction requires a label table");
    }
    LabelTable aligned = labels->align_to(data.row_ids).select(opt.batch_vars);
    out.design = build_design(aligned, {.intercept = true, .prune = opt.prune});
    out.reduced = og_reduce(X, *out.design, opt.reduce);
    if (opt.projection) {
        Projector projector(*out.design);
        out.result = run_tsne(out.reduced.X_hat, opt.tsne, &projector, observer);
    } else {
        out.result = run_tsne(out.reduced.X_hat, opt.tsne, nullptr, observer);
    }
    return out;
}

/**
 * @brief Parsed `key=value` configuration. Blank lines and `#` comments are ignored.
 */
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>") {
        KeyValueConfig cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            auto hash = line.find('#');
            if (hash != std::string::npos) {
                line.erase(hash);
            }
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t");
                auto e = s.find_last_not_of(" \t");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) {
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ValidationError(source + ":" + std::to_string(lineno) + ": expected key=value");
            }
            std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            if (key.empty()) {
                throw ValidationError(source + ":" + std::to_string(lineno) + ": empty key");
            }
            if (!cfg.values_.emplace(key, value).second) {
                throw ValidationError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            }
        }
        return cfg;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw ValidationError(path + ": cannot open config file");
        }
        return parse(in, path);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback) const {
        used_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto s = get(key, "");
        if (s.empty()) {
            return fallback;
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ValidationError("config key '" + key + "': '" + s + "' is not a number");
        }
        return v;
    }

    std::size_t get_count(const std::string& key, std::size_t fallback) const {
        double v = get_double(key, static_cast<double>(fallback));
        if (v < 0 || v != std::floor(v)) {
            throw ValidationError("config key '" + key + "' must be a nonnegative integer");
        }
        return static_cast<std::size_t>(v);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto s = get(key, "");
        if (s.empty()) {
            return fallback;
        }
        if (s == "true" || s == "1" || s == "yes" || s == "on") {
            return true;
        }
        if (s == "false" || s == "0" || s == "no" || s == "off") {
            return false;
        }
        throw ValidationError("config key '" + key + "': '" + s + "' is not a boolean");
    }

    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const {
        auto s = get(key, "");
        if (s.empty()) {
            return fallback;
        }
        std::vector<std::string> out;
        for (auto& f : internal::split_fields(s, ',')) {
            if (!f.empty()) {
                out.push_back(f);
            }
        }
        return out;
    }

    /// Keys present in the file that no getter has asked for.
    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) {
            if (!used_.count(k)) {
                out.push_back(k);
            }
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}

#endif
