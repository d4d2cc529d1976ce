#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace comap {

// A plotted series: x/y pairs plus optional symmetric error bars.
struct PlotSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;  // empty or same length as y
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

// Self-contained SVG line plot with axes, ticks, optional error bars, and a
// legend. NaN samples break the polyline rather than being drawn.
inline std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<PlotSeries>& series,
                                 int width = 640, int height = 420) {
    const double ml = 62, mr = 16, mt = 34, mb = 46;
    const double pw = width - ml - mr;
    const double ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const PlotSeries& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.x[i]) || std::isnan(s.y[i])) continue;
            const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i] - e);
            ymax = std::max(ymax, s.y[i] + e);
        }
    }
    if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
    if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" viewBox=\"0 0 " + std::to_string(width) + " " +
           std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + detail::svg_num(width / 2.0) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + title + "</text>\n";

    // Axes with 5 ticks per side.
    svg += "<g stroke=\"#333\" stroke-width=\"1\" font-family=\"sans-serif\" "
           "font-size=\"11\">\n";
    svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt + ph) +
           "\" x2=\"" + detail::svg_num(ml + pw) + "\" y2=\"" +
           detail::svg_num(mt + ph) + "\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(mt) +
           "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(mt + ph) +
           "\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 4.0;
        const double fy = ymin + (ymax - ymin) * k / 4.0;
        svg += "<line x1=\"" + detail::svg_num(px(fx)) + "\" y1=\"" +
               detail::svg_num(mt + ph) + "\" x2=\"" + detail::svg_num(px(fx)) +
               "\" y2=\"" + detail::svg_num(mt + ph + 4) + "\"/>\n";
        svg += "<text x=\"" + detail::svg_num(px(fx)) + "\" y=\"" +
               detail::svg_num(mt + ph + 17) + "\" text-anchor=\"middle\" "
               "stroke=\"none\" fill=\"#333\">" + detail::tick_label(fx) + "</text>\n";
        svg += "<line x1=\"" + detail::svg_num(ml - 4) + "\" y1=\"" +
               detail::svg_num(py(fy)) + "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" +
               detail::svg_num(py(fy)) + "\"/>\n";
        svg += "<text x=\"" + detail::svg_num(ml - 7) + "\" y=\"" +
               detail::svg_num(py(fy) + 4) + "\" text-anchor=\"end\" stroke=\"none\" "
               "fill=\"#333\">" + detail::tick_label(fy) + "</text>\n";
    }
    svg += "<text x=\"" + detail::svg_num(ml + pw / 2) + "\" y=\"" +
           detail::svg_num(height - 10.0) +
           "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" + xlabel +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + detail::svg_num(mt + ph / 2) +
           "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\" transform=\"rotate(-90 "
           "16 " + detail::svg_num(mt + ph / 2) + ")\">" + ylabel + "</text>\n";
    svg += "</g>\n";

    for (const PlotSeries& s : series) {
        if (!s.yerr.empty()) {
            svg += "<g stroke=\"" + s.color + "\" stroke-width=\"1\" opacity=\"0.7\">\n";
            for (size_t i = 0; i < s.x.size() && i < s.yerr.size(); ++i) {
                if (std::isnan(s.y[i]) || std::isnan(s.yerr[i])) continue;
                const double cx = px(s.x[i]);
                svg += "<line x1=\"" + detail::svg_num(cx) + "\" y1=\"" +
                       detail::svg_num(py(s.y[i] - s.yerr[i])) + "\" x2=\"" +
                       detail::svg_num(cx) + "\" y2=\"" +
                       detail::svg_num(py(s.y[i] + s.yerr[i])) + "\"/>\n";
                for (double dy : {s.y[i] - s.yerr[i], s.y[i] + s.yerr[i]}) {
                    svg += "<line x1=\"" + detail::svg_num(cx - 3) + "\" y1=\"" +
                           detail::svg_num(py(dy)) + "\" x2=\"" +
                           detail::svg_num(cx + 3) + "\" y2=\"" + detail::svg_num(py(dy)) +
                           "\"/>\n";
                }
            }
            svg += "</g>\n";
        }
        std::string points;
        bool open = false;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.x[i]) || std::isnan(s.y[i])) {
                if (open) {
                    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
                           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
                    points.clear();
                    open = false;
                }
                continue;
            }
            points += detail::svg_num(px(s.x[i])) + "," + detail::svg_num(py(s.y[i])) + " ";
            open = true;
        }
        if (open) {
            svg += "<polyline fill=\"none\" stroke=\"" + s.color +
                   "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        }
    }

    double ly = mt + 14;
    for (const PlotSeries& s : series) {
        svg += "<line x1=\"" + detail::svg_num(ml + pw - 120) + "\" y1=\"" +
               detail::svg_num(ly - 4) + "\" x2=\"" + detail::svg_num(ml + pw - 100) +
               "\" y2=\"" + detail::svg_num(ly - 4) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::svg_num(ml + pw - 95) + "\" y=\"" +
               detail::svg_num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">" + s.label +
               "</text>\n";
        ly += 16;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace comap
