#ifndef BCTSNE_DESIGN_HPP
#define BCTSNE_DESIGN_HPP

#include <cmath>
#include <string>
#include <vector>

#include "labels.hpp"
#include "matrix.hpp"

/**
 * @file design.hpp
 *
 * @brief Dummy-coded batch design matrices.
 */

namespace bctsne {

/**
 * @brief How one categorical variable was encoded into design columns.
 */
struct VariableEncoding {
    std::string name;
    std::vector<std::string> levels;
    std::string reference;
};

/**
 * @brief The n x b batch design `Z` with its encoding metadata.
 *
 * Columns are the optional intercept followed by one 0/1 indicator per non-reference level.
 * After `build_design()` the matrix has full column rank.
 */
struct BatchDesign {
    Matrix Z;
    std::vector<std::string> column_names;
    std::vector<VariableEncoding> encoding;
    bool has_intercept = false;

    /** Columns dropped during pruning because they lay in the span of earlier columns. */
    std::vector<std::string> absorbed;

    std::size_t rows() const { return Z.rows(); }
    std::size_t cols() const { return Z.cols(); }
};

/**
 * @brief Raised when the encoded design is rank deficient and pruning was not requested.
 */
class CollinearityError : public ValidationError {
public:
    CollinearityError(const std::string& msg, std::vector<std::string> dependent) :
        ValidationError(msg), dependent_(std::move(dependent)) {}

    const std::vector<std::string>& dependent_columns() const { return dependent_; }

private:
    std::vector<std::string> dependent_;
};

struct DesignOptions {
    bool intercept = true;
    /** Drop dependent columns (recording them in `BatchDesign::absorbed`) instead of throwing. */
    bool prune = false;
};

/**
 * Builds a design from categorical columns.
 *
 * Each variable is one-hot encoded with its first (alphabetically smallest) level as reference.
 * Columns are then checked in order by Gram-Schmidt; a column whose residual against the kept
 * columns vanishes is dependent. Dependent columns either raise a `CollinearityError` naming them
 * or, with `prune`, are dropped.
 */
inline BatchDesign build_design(const LabelTable& labels, DesignOptions opt = {}) {
    if (labels.columns.empty()) {
        throw ValidationError("build_design: at least one categorical variable is required");
    }
    const std::size_t n = labels.columns.front().size();

    BatchDesign design;
    design.has_intercept = opt.intercept;
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names;
    if (opt.intercept) {
        cols.emplace_back(n, 1.0);
        names.emplace_back("(Intercept)");
    }

    for (const auto& var : labels.columns) {
        if (var.size() != n) {
            throw ValidationError("build_design: variable '" + var.name + "' has " + std::to_string(var.size()) +
                                  " rows, expected " + std::to_string(n));
        }
        if (var.num_levels() < 2 && !opt.intercept) {
            throw ValidationError("build_design: variable '" + var.name +
                                  "' has a single level and no intercept is present");
        }
        design.encoding.push_back({var.name, var.levels, var.levels.empty() ? "" : var.levels.front()});
        for (std::size_t l = 1; l < var.num_levels(); ++l) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) {
                col[i] = var.codes[i] == l ? 1.0 : 0.0;
            }
            cols.push_back(std::move(col));
            names.push_back(var.name + "=" + var.levels[l]);
        }
    }

    // Modified Gram-Schmidt with one reorthogonalization pass.
    std::vector<std::vector<double>> basis;
    std::vector<std::size_t> kept;
    std::vector<std::string> dependent;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<double> r = cols[c];
        double orig = 0;
        for (double v : r) {
            orig += v * v;
        }
        orig = std::sqrt(orig);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                double dot = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    dot += q[i] * r[i];
                }
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] -= dot * q[i];
                }
            }
        }
        double rn = 0;
        for (double v : r) {
            rn += v * v;
        }
        rn = std::sqrt(rn);
        if (orig == 0 || rn <= 1e-9 * orig) {
            dependent.push_back(names[c]);
            continue;
        }
        for (auto& v : r) {
            v /= rn;
        }
        basis.push_back(std::move(r));
        kept.push_back(c);
    }

    if (!dependent.empty() && !opt.prune) {
        std::string list;
        for (const auto& d : dependent) {
            list += (list.empty() ? "" : ", ") + d;
        }
        throw CollinearityError("build_design: design is rank deficient; dependent columns: " + list +
                                    " (enable pruning to drop them)",
                                dependent);
    }
    if (kept.empty()) {
        throw ValidationError("build_design: design has no usable columns");
    }

    design.absorbed = std::move(dependent);
    design.Z = Matrix(n, kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const auto& col = cols[kept[j]];
        for (std::size_t i = 0; i < n; ++i) {
            design.Z(i, j) = col[i];
        }
        design.column_names.push_back(names[kept[j]]);
    }
    return design;
}

/// Design consisting of the intercept column alone.
inline BatchDesign intercept_design(std::size_t n) {
    BatchDesign design;
    design.has_intercept = true;
    design.Z = Matrix(n, 1, 1.0);
    design.column_names = {"(Intercept)"};
    return design;
}

/// Column-centered copy of the design with the intercept removed.
inline Matrix centered_design(const BatchDesign& design) {
    const std::size_t n = design.rows();
    std::size_t first = design.has_intercept ? 1 : 0;
    Matrix out(n, design.cols() - first);
    for (std::size_t j = first; j < design.cols(); ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mean += design.Z(i, j);
        }
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            out(i, j - first) = design.Z(i, j) - mean;
        }
    }
    return out;
}

}

#endif
