#ifndef BCTSNE_PLOT_HPP
#define BCTSNE_PLOT_HPP

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "labels.hpp"
#include "matrix.hpp"

/**
 * @file plot.hpp
 *
 * @brief Static SVG scatter plots of 2-D embeddings.
 *
 * Output depends only on the inputs (coordinates are printed with two decimals), so identical
 * embeddings produce byte-identical files.
 */

namespace bctsne {

inline constexpr int svg_width = 800;
inline constexpr int svg_height = 600;

/** Okabe-Ito palette plus black. */
inline constexpr std::array<const char*, 8> svg_palette = {
    "#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00", "#CC79A7", "#000000",
};

enum class Marker { circle, square, triangle, diamond, cross, triangle_down };
inline constexpr std::size_t num_markers = 6;

struct PlotOptions {
    std::string title;
    double point_size = 3.5;
};

struct SvgPlot {
    std::string svg;
    std::vector<std::string> warnings;
};

namespace internal {

inline std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string marker_svg(Marker m, double x, double y, double r, const std::string& fill) {
    const std::string style = " fill=\"" + fill + "\" stroke=\"#333333\" stroke-width=\"0.4\"";
    switch (m) {
    case Marker::circle:
        return "<circle cx=\"" + fmt2(x) + "\" cy=\"" + fmt2(y) + "\" r=\"" + fmt2(r) + "\"" + style + "/>";
    case Marker::square:
        return "<rect x=\"" + fmt2(x - r) + "\" y=\"" + fmt2(y - r) + "\" width=\"" + fmt2(2 * r) + "\" height=\"" +
               fmt2(2 * r) + "\"" + style + "/>";
    case Marker::triangle:
        return "<polygon points=\"" + fmt2(x) + "," + fmt2(y - r * 1.2) + " " + fmt2(x - r * 1.1) + "," +
               fmt2(y + r * 0.8) + " " + fmt2(x + r * 1.1) + "," + fmt2(y + r * 0.8) + "\"" + style + "/>";
    case Marker::diamond:
        return "<polygon points=\"" + fmt2(x) + "," + fmt2(y - r * 1.3) + " " + fmt2(x + r * 1.3) + "," + fmt2(y) + " " +
               fmt2(x) + "," + fmt2(y + r * 1.3) + " " + fmt2(x - r * 1.3) + "," + fmt2(y) + "\"" + style + "/>";
    case Marker::cross: {
        double a = r * 1.2, b = r * 0.4;
        return "<polygon points=\"" + fmt2(x - b) + "," + fmt2(y - a) + " " + fmt2(x + b) + "," + fmt2(y - a) + " " +
               fmt2(x + b) + "," + fmt2(y - b) + " " + fmt2(x + a) + "," + fmt2(y - b) + " " + fmt2(x + a) + "," +
               fmt2(y + b) + " " + fmt2(x + b) + "," + fmt2(y + b) + " " + fmt2(x + b) + "," + fmt2(y + a) + " " +
               fmt2(x - b) + "," + fmt2(y + a) + " " + fmt2(x - b) + "," + fmt2(y + b) + " " + fmt2(x - a) + "," +
               fmt2(y + b) + " " + fmt2(x - a) + "," + fmt2(y - b) + " " + fmt2(x - b) + "," + fmt2(y - b) + "\"" +
               style + "/>";
    }
    case Marker::triangle_down:
        return "<polygon points=\"" + fmt2(x) + "," + fmt2(y + r * 1.2) + " " + fmt2(x - r * 1.1) + "," +
               fmt2(y - r * 0.8) + " " + fmt2(x + r * 1.1) + "," + fmt2(y - r * 0.8) + "\"" + style + "/>";
    }
    return {};
}

}

/**
 * Renders the first two embedding columns as an 800x600 scatter plot.
 *
 * Points are colored by `color` and shaped by `shape` (either may be null). The data are fitted
 * into a square-aspect panel on the left; a legend listing every level sits on the right.
 * Palettes and markers cycle when a variable has more levels than there are colors or shapes,
 * with a warning.
 */
inline SvgPlot render_scatter_svg(const Matrix& Y, const Categorical* color, const Categorical* shape,
                                  const PlotOptions& opt = {}) {
    const std::size_t n = Y.rows();
    if (Y.cols() < 2) {
        throw ValidationError("plot: embedding needs at least two columns");
    }
    if ((color && color->size() != n) || (shape && shape->size() != n)) {
        throw ValidationError("plot: label count does not match embedding rows");
    }

    SvgPlot out;
    if (color && color->num_levels() > svg_palette.size()) {
        out.warnings.push_back("color variable '" + color->name + "' has " + std::to_string(color->num_levels()) +
                               " levels; palette of " + std::to_string(svg_palette.size()) + " colors is reused");
    }
    if (shape && shape->num_levels() > num_markers) {
        out.warnings.push_back("shape variable '" + shape->name + "' has " + std::to_string(shape->num_levels()) +
                               " levels; " + std::to_string(num_markers) + " markers are reused");
    }

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    if (n > 0) {
        xmin = xmax = Y(0, 0);
        ymin = ymax = Y(0, 1);
        for (std::size_t i = 1; i < n; ++i) {
            xmin = std::min(xmin, Y(i, 0));
            xmax = std::max(xmax, Y(i, 0));
            ymin = std::min(ymin, Y(i, 1));
            ymax = std::max(ymax, Y(i, 1));
        }
    }

    // Panel: 20..580 horizontally, 40..580 vertically (560 x 540).
    const double px0 = 20, py0 = 40, pw = 560, ph = 540;
    double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    double scale = std::min(pw, ph) / span;
    double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    double ox = px0 + pw / 2, oy = py0 + ph / 2;

    std::string svg;
    svg.reserve(200 + n * 120);
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
    if (!opt.title.empty()) {
        svg += "<text x=\"300\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
               internal::xml_escape(opt.title) + "</text>\n";
    }

    svg += "<g id=\"points\">\n";
    for (std::size_t i = 0; i < n; ++i) {
        double x = ox + (Y(i, 0) - cx) * scale;
        double y = oy - (Y(i, 1) - cy) * scale;
        const char* fill = color ? svg_palette[color->codes[i] % svg_palette.size()] : svg_palette[4];
        auto marker = shape ? static_cast<Marker>(shape->codes[i] % num_markers) : Marker::circle;
        svg += internal::marker_svg(marker, x, y, opt.point_size, fill);
        svg += '\n';
    }
    svg += "</g>\n";

    svg += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    double ly = 50;
    const double lx = 610;
    if (color) {
        svg += "<text x=\"" + internal::fmt2(lx) + "\" y=\"" + internal::fmt2(ly) + "\" font-weight=\"bold\">" +
               internal::xml_escape(color->name) + "</text>\n";
        ly += 18;
        for (std::size_t l = 0; l < color->num_levels(); ++l) {
            svg += internal::marker_svg(Marker::circle, lx + 6, ly - 4, 5, svg_palette[l % svg_palette.size()]);
            svg += "<text x=\"" + internal::fmt2(lx + 18) + "\" y=\"" + internal::fmt2(ly) + "\">" +
                   internal::xml_escape(color->levels[l]) + "</text>\n";
            ly += 16;
        }
        ly += 10;
    }
    if (shape) {
        svg += "<text x=\"" + internal::fmt2(lx) + "\" y=\"" + internal::fmt2(ly) + "\" font-weight=\"bold\">" +
               internal::xml_escape(shape->name) + "</text>\n";
        ly += 18;
        for (std::size_t l = 0; l < shape->num_levels(); ++l) {
            svg += internal::marker_svg(static_cast<Marker>(l % num_markers), lx + 6, ly - 4, 5, "#bbbbbb");
            svg += "<text x=\"" + internal::fmt2(lx + 18) + "\" y=\"" + internal::fmt2(ly) + "\">" +
                   internal::xml_escape(shape->levels[l]) + "</text>\n";
            ly += 16;
        }
    }
    svg += "</g>\n</svg>\n";

    out.svg = std::move(svg);
    return out;
}

}

#endif
