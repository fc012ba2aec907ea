#ifndef BCTSNE_LABELS_HPP
#define BCTSNE_LABELS_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "matrix.hpp"

/**
 * @file labels.hpp
 *
 * @brief Categorical per-cell annotations (batch, cell type, ...).
 */

namespace bctsne {

/**
 * @brief One categorical variable, stored as integer codes into a sorted level list.
 */
struct Categorical {
    std::string name;
    std::vector<std::string> levels;
    std::vector<std::size_t> codes;

    Categorical() = default;

    Categorical(std::string nm, const std::vector<std::string>& values) : name(std::move(nm)) {
        levels = values;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        codes.reserve(values.size());
        for (const auto& v : values) {
            codes.push_back(static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), v) - levels.begin()));
        }
    }

    std::size_t size() const { return codes.size(); }
    std::size_t num_levels() const { return levels.size(); }
    const std::string& value(std::size_t i) const { return levels[codes[i]]; }

    std::vector<std::size_t> level_counts() const {
        std::vector<std::size_t> out(levels.size());
        for (auto c : codes) {
            ++out[c];
        }
        return out;
    }
};

/**
 * @brief Table of categorical columns keyed by cell identifier.
 */
struct LabelTable {
    std::vector<std::string> ids;
    std::vector<Categorical> columns;

    std::size_t rows() const { return ids.size(); }

    const Categorical& column(const std::string& name) const {
        for (const auto& c : columns) {
            if (c.name == name) {
                return c;
            }
        }
        std::string known;
        for (const auto& c : columns) {
            known += (known.empty() ? "" : ", ") + c.name;
        }
        throw ValidationError("unknown label variable '" + name + "' (available: " + known + ")");
    }

    bool has_column(const std::string& name) const {
        return std::any_of(columns.begin(), columns.end(), [&](const Categorical& c) { return c.name == name; });
    }

    /// Subset of columns, in the requested order.
    LabelTable select(const std::vector<std::string>& names) const {
        LabelTable out;
        out.ids = ids;
        for (const auto& n : names) {
            out.columns.push_back(column(n));
        }
        return out;
    }

    /**
     * Reorders rows to follow `reference_ids`.
     * Every reference id must be present; rows not referenced are dropped.
     */
    LabelTable align_to(const std::vector<std::string>& reference_ids) const {
        std::map<std::string, std::size_t> where;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            where.emplace(ids[i], i);
        }

        std::vector<std::size_t> order;
        order.reserve(reference_ids.size());
        std::vector<std::string> missing;
        for (const auto& id : reference_ids) {
            auto it = where.find(id);
            if (it == where.end()) {
                missing.push_back(id);
            } else {
                order.push_back(it->second);
            }
        }
        if (!missing.empty()) {
            std::string msg = "label table is missing " + std::to_string(missing.size()) + " cell id(s):";
            for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
                msg += " " + missing[i];
            }
            if (missing.size() > 20) {
                msg += " ...";
            }
            throw ValidationError(msg);
        }

        LabelTable out;
        out.ids = reference_ids;
        for (const auto& col : columns) {
            std::vector<std::string> values;
            values.reserve(order.size());
            for (auto o : order) {
                values.push_back(col.value(o));
            }
            out.columns.emplace_back(col.name, values);
        }
        return out;
    }
};

}

#endif
