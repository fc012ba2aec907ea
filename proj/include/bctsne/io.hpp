#ifndef BCTSNE_IO_HPP
#define BCTSNE_IO_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "labels.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "run.hpp"

/**
 * @file io.hpp
 *
 * @brief Delimited-text and binary persistence for matrices, labels, embeddings, reports and loss traces.
 *
 * Matrix files have a header row whose first field names the identifier column and whose
 * remaining fields are feature names; every following row is an identifier followed by numbers.
 * Values are written with 17 significant digits so that reading back reproduces them exactly.
 */

namespace bctsne {

/**
 * @brief Raised for malformed files; the message is prefixed with `file:line:column`.
 */
class ParseError : public ValidationError {
public:
    ParseError(const std::string& file, std::size_t line, std::size_t column, const std::string& what) :
        ValidationError(file + ":" + std::to_string(line) + (column ? ":" + std::to_string(column) : std::string()) +
                        ": " + what),
        line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/**
 * @brief A matrix with its row identifiers and column names.
 */
struct DataMatrix {
    Matrix values;
    std::vector<std::string> row_ids;
    std::vector<std::string> col_names;
    std::string id_header = "cell_id";
};

namespace internal {

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        std::string_view field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t') && delim != '\t') {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || (field.back() == '\t' && delim != '\t'))) {
            field.remove_suffix(1);
        }
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
            field = field.substr(1, field.size() - 2);
        }
        out.emplace_back(field);
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw ValidationError(path + ": cannot open file for reading");
    }
    return in;
}

inline std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) {
        throw ValidationError(path + ": cannot open file for writing");
    }
    return out;
}

inline bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            return true;
        }
    }
    return false;
}

inline void strip_bom(std::string& line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF && static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Shared reader for the id-column layout; `on_row` receives (fields, lineno).
template<class RowHandler>
std::vector<std::string> read_delimited(const std::string& path, char delimiter, RowHandler on_row) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno)) {
        throw ParseError(path, 1, 0, "empty file");
    }
    strip_bom(line);
    char delim = delimiter ? delimiter : (line.find('\t') != std::string::npos ? '\t' : ',');
    auto header = split_fields(line, delim);
    if (header.size() < 2) {
        throw ParseError(path, lineno, 0, "header needs an identifier column and at least one more column");
    }

    std::map<std::string, std::size_t> seen;
    while (next_line(in, line, lineno)) {
        auto fields = split_fields(line, delim);
        if (fields.size() != header.size()) {
            throw ParseError(path, lineno, 0,
                             "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        auto [it, fresh] = seen.emplace(fields[0], lineno);
        if (!fresh) {
            throw ParseError(path, lineno, 1,
                             "duplicate identifier '" + fields[0] + "' (first seen on line " + std::to_string(it->second) + ")");
        }
        on_row(fields, lineno, delim);
    }
    if (seen.empty()) {
        throw ParseError(path, lineno, 0, "no data rows");
    }
    return header;
}

}

/**
 * Reads a matrix file with identifiers in the first column.
 * `delimiter` of 0 picks tab if the header contains one, comma otherwise.
 */
inline DataMatrix read_matrix_csv(const std::string& path, char delimiter = 0) {
    DataMatrix out;
    std::vector<double> values;
    auto header = internal::read_delimited(path, delimiter, [&](const std::vector<std::string>& fields, std::size_t lineno, char) {
        out.row_ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto& f = fields[c];
            double v = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
                throw ParseError(path, lineno, c + 1, "non-numeric value '" + f + "'");
            }
            values.push_back(v);
        }
    });
    out.id_header = header[0];
    out.col_names.assign(header.begin() + 1, header.end());
    out.values = Matrix(out.row_ids.size(), out.col_names.size(), std::move(values));
    return out;
}

inline void write_matrix_csv(const DataMatrix& m, const std::string& path, char delimiter = ',') {
    if (m.row_ids.size() != m.values.rows() || m.col_names.size() != m.values.cols()) {
        throw ValidationError("write_matrix_csv: identifiers do not match matrix shape");
    }
    auto out = internal::open_output(path);
    std::string buf = m.id_header;
    for (const auto& c : m.col_names) {
        buf += delimiter;
        buf += c;
    }
    buf += '\n';
    out << buf;
    for (std::size_t i = 0; i < m.values.rows(); ++i) {
        buf = m.row_ids[i];
        for (double v : m.values.row(i)) {
            buf += delimiter;
            buf += internal::format_double(v);
        }
        buf += '\n';
        out << buf;
    }
}

/**
 * Reads categorical annotations: first column cell identifier, every other column one variable.
 */
inline LabelTable read_labels_csv(const std::string& path, char delimiter = 0) {
    LabelTable out;
    std::vector<std::vector<std::string>> raw;
    auto header = internal::read_delimited(path, delimiter, [&](const std::vector<std::string>& fields, std::size_t lineno, char) {
        if (raw.empty()) {
            raw.resize(fields.size() - 1);
        }
        out.ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c].empty()) {
                throw ParseError(path, lineno, c + 1, "empty label");
            }
            raw[c - 1].push_back(fields[c]);
        }
    });
    for (std::size_t c = 1; c < header.size(); ++c) {
        out.columns.emplace_back(header[c], raw[c - 1]);
    }
    return out;
}

inline void write_labels_csv(const LabelTable& labels, const std::string& path) {
    auto out = internal::open_output(path);
    out << "cell_id";
    for (const auto& c : labels.columns) {
        out << ',' << c.name;
    }
    out << '\n';
    for (std::size_t i = 0; i < labels.rows(); ++i) {
        out << labels.ids[i];
        for (const auto& c : labels.columns) {
            out << ',' << c.value(i);
        }
        out << '\n';
    }
}

/// Embedding file: `cell_id,y1,y2[,y3]`.
inline void write_embedding_csv(const Matrix& Y, const std::vector<std::string>& ids, const std::string& path) {
    DataMatrix m;
    m.values = Y;
    m.row_ids = ids;
    for (std::size_t c = 0; c < Y.cols(); ++c) {
        m.col_names.push_back("y" + std::to_string(c + 1));
    }
    write_matrix_csv(m, path);
}

inline void write_embedding_csv(const EmbeddingState& state, const std::vector<std::string>& ids, const std::string& path) {
    write_embedding_csv(state.Y, ids, path);
}

/// Report file: one row per (labeling, metric) with raw and rescaled values.
inline void write_report_csv(const MetricsReport& report, const std::string& path) {
    auto out = internal::open_output(path);
    out << "labeling,metric,raw,rescaled\n";
    auto row = [&](const std::string& lab, const char* metric, double raw, double rescaled) {
        out << lab << ',' << metric << ',' << internal::format_double(raw) << ',' << internal::format_double(rescaled) << '\n';
    };
    for (const auto& r : report.rows) {
        row(r.labeling, "silhouette", r.sil_raw, r.sil_rescaled);
        row(r.labeling, "kbet", r.kbet_acceptance, r.kbet_acceptance);
        row(r.labeling, "lisi", r.lisi_mean, r.lisi_rescaled);
        row(r.labeling, "pcreg", r.pcreg_r2, r.pcreg_r2);
    }
}

/// Loss trace file: `iteration,kl_loss,orthogonality_maxabs`.
inline void write_loss_trace(const std::vector<TraceEntry>& trace, const std::string& path) {
    auto out = internal::open_output(path);
    out << "iteration,kl_loss,orthogonality_maxabs\n";
    for (const auto& t : trace) {
        out << t.iteration << ',' << internal::format_double(t.kl_loss) << ','
            << (std::isnan(t.orthogonality_maxabs) ? std::string("nan") : internal::format_double(t.orthogonality_maxabs))
            << '\n';
    }
}

/** Magic bytes opening the binary matrix cache. */
inline constexpr char binary_magic[8] = {'B', 'C', 'T', 'S', 'N', 'E', 'M', '1'};

namespace internal {

template<typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template<typename T>
void put(std::ostream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template<typename T>
T get(std::istream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw ValidationError(path + ": truncated binary matrix");
    }
    return to_little(v);
}

inline void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, const std::string& path) {
    auto len = get<std::uint32_t>(in, path);
    std::string s(len, '\0');
    if (len && !in.read(s.data(), len)) {
        throw ValidationError(path + ": truncated binary matrix");
    }
    return s;
}

}

/**
 * Binary cache layout: 8 magic bytes, rows and cols as little-endian u64, the identifier-column
 * header, row ids and column names as u32-length-prefixed strings, then row-major little-endian doubles.
 */
inline void write_matrix_binary(const DataMatrix& m, const std::string& path) {
    auto out = internal::open_output(path, std::ios::out | std::ios::binary);
    out.write(binary_magic, sizeof(binary_magic));
    internal::put<std::uint64_t>(out, m.values.rows());
    internal::put<std::uint64_t>(out, m.values.cols());
    internal::put_string(out, m.id_header);
    for (const auto& id : m.row_ids) {
        internal::put_string(out, id);
    }
    for (const auto& c : m.col_names) {
        internal::put_string(out, c);
    }
    for (double v : m.values.values()) {
        internal::put<double>(out, v);
    }
}

inline DataMatrix read_matrix_binary(const std::string& path) {
    auto in = internal::open_input(path, std::ios::in | std::ios::binary);
    char magic[sizeof(binary_magic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, binary_magic, sizeof(magic)) != 0) {
        throw ValidationError(path + ": not a binary matrix file");
    }
    auto rows = internal::get<std::uint64_t>(in, path);
    auto cols = internal::get<std::uint64_t>(in, path);
    DataMatrix m;
    m.id_header = internal::get_string(in, path);
    for (std::uint64_t i = 0; i < rows; ++i) {
        m.row_ids.push_back(internal::get_string(in, path));
    }
    for (std::uint64_t j = 0; j < cols; ++j) {
        m.col_names.push_back(internal::get_string(in, path));
    }
    std::vector<double> values(rows * cols);
    for (auto& v : values) {
        v = internal::get<double>(in, path);
    }
    m.values = Matrix(rows, cols, std::move(values));
    return m;
}

/// Reads a `.bcm` binary cache or, for any other extension, a delimited text file.
inline DataMatrix read_matrix(const std::string& path) {
    if (std::filesystem::path(path).extension() == ".bcm") {
        return read_matrix_binary(path);
    }
    return read_matrix_csv(path);
}

}

#endif
