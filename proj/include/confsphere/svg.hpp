#pragma once

// Minimal deterministic SVG line plots; fixed canvas, fixed palette, numbers
// printed with fixed precision so identical data gives identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "confsphere/report.hpp"

namespace confsphere {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace detail

inline void write_line_plot(const std::string& path, const std::string& title,
                            std::span<const Series> series) {
    if (series.empty()) throw std::invalid_argument("write_line_plot: no series");
    const double width = 720.0, height = 480.0;
    const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (width - ml - mr); };
    const auto sy = [&](double v) { return height - mb - (v - ymin) / (ymax - ymin) * (height - mt - mb); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    out << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    out << "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" << title << "</text>\n";
    // axes
    out << "<line x1=\"" << detail::fmt(ml) << "\" y1=\"" << detail::fmt(height - mb) << "\" x2=\""
        << detail::fmt(width - mr) << "\" y2=\"" << detail::fmt(height - mb)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << detail::fmt(ml) << "\" y1=\"" << detail::fmt(mt) << "\" x2=\""
        << detail::fmt(ml) << "\" y2=\"" << detail::fmt(height - mb) << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 5.0;
        const double yv = ymin + (ymax - ymin) * t / 5.0;
        out << "<text x=\"" << detail::fmt(sx(xv)) << "\" y=\"" << detail::fmt(height - mb + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt(xv) << "</text>\n";
        out << "<text x=\"" << detail::fmt(ml - 8) << "\" y=\"" << detail::fmt(sy(yv) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt(yv) << "</text>\n";
    }
    std::size_t color = 0;
    double legend_y = mt + 6.0;
    for (const auto& s : series) {
        const char* stroke = palette[color % 6];
        out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << " ";
            out << detail::fmt(sx(s.x[i])) << "," << detail::fmt(sy(s.y[i]));
        }
        out << "\"/>\n";
        out << "<text x=\"" << detail::fmt(width - mr - 6) << "\" y=\"" << detail::fmt(legend_y)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << stroke
            << "\">" << s.label << "</text>\n";
        legend_y += 14.0;
        ++color;
    }
    out << "</svg>\n";
}

// Renders the requested series kinds from a bundle, one SVG per series kind.
// Throws when the bundle lacks a requested kind.
inline std::vector<std::string> emit_plots(const ReportBundle& bundle,
                                           std::span<const std::string> kinds,
                                           const std::string& out_dir) {
    std::vector<std::string> written;
    for (const auto& kind : kinds) {
        std::vector<Series> matching;
        for (const auto& s : bundle.series)
            if (s.kind == kind) matching.push_back(s);
        if (matching.empty())
            throw std::invalid_argument("emit_plots: bundle has no series of kind '" + kind + "'");
        const std::string path = out_dir + "/" + bundle.suite + "-" + kind + ".svg";
        write_line_plot(path, bundle.suite + ": " + kind, matching);
        written.push_back(path);
    }
    return written;
}

}  // namespace confsphere
