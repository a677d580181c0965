#pragma once

// Minimal standalone SVG emission for the report plots.  CSV files are the
// authoritative outputs; these are viewing conveniences.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace negbound::svg {

struct Canvas {
    double width = 640.0;
    double height = 400.0;
    double margin_left = 60.0;
    double margin_right = 20.0;
    double margin_top = 30.0;
    double margin_bottom = 50.0;
    std::ostringstream body;

    double plot_width() const { return width - margin_left - margin_right; }
    double plot_height() const { return height - margin_top - margin_bottom; }

    std::string finish(const std::string& title) {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
            << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"14\">"
            << title << "</text>\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Grouped bars per category with an optional overlay line (secondary axis
/// in [0, 1]).  Non-finite bar values are drawn capped and labeled "inf".
struct GroupedBars {
    std::vector<std::string> categories;
    std::vector<std::string> series_names;               // one per bar in a group
    std::vector<std::vector<double>> values;              // [series][category]
    std::vector<double> overlay;                          // size 0 or categories
    std::string overlay_name;
    std::string y_label;
};

inline std::string grouped_bar_chart(const GroupedBars& data, const std::string& title) {
    Canvas c;
    const std::size_t n_cat = data.categories.size();
    const std::size_t n_series = data.series_names.size();

    double y_max = 0.0;
    bool any_inf = false;
    for (const auto& series : data.values) {
        for (double v : series) {
            if (std::isfinite(v)) {
                y_max = std::max(y_max, v);
            } else {
                any_inf = true;
            }
        }
    }
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= any_inf ? 1.3 : 1.05;

    const double px = c.plot_width() / static_cast<double>(n_cat);
    const double bar_w = px * 0.8 / static_cast<double>(n_series);
    const char* colors[] = {"#4878a8", "#d1605e", "#6aa56e", "#b8860b"};

    auto y_of = [&](double v) {
        return c.margin_top + c.plot_height() * (1.0 - std::min(v, y_max) / y_max);
    };

    // axes
    c.body << "<line x1=\"" << c.margin_left << "\" y1=\"" << c.margin_top << "\" x2=\""
           << c.margin_left << "\" y2=\"" << c.margin_top + c.plot_height() << "\" stroke=\"black\"/>\n";
    c.body << "<line x1=\"" << c.margin_left << "\" y1=\"" << c.margin_top + c.plot_height()
           << "\" x2=\"" << c.margin_left + c.plot_width() << "\" y2=\""
           << c.margin_top + c.plot_height() << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_max * tick / 4.0;
        const double y = y_of(v);
        c.body << "<text x=\"" << c.margin_left - 6 << "\" y=\"" << y + 4
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(v)
               << "</text>\n";
    }
    c.body << "<text x=\"14\" y=\"" << c.margin_top + c.plot_height() / 2
           << "\" transform=\"rotate(-90 14 " << c.margin_top + c.plot_height() / 2
           << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << data.y_label << "</text>\n";

    for (std::size_t cat = 0; cat < n_cat; ++cat) {
        const double x0 = c.margin_left + px * static_cast<double>(cat) + px * 0.1;
        for (std::size_t s = 0; s < n_series; ++s) {
            const double v = data.values[s][cat];
            const bool inf = !std::isfinite(v);
            const double shown = inf ? y_max : v;
            const double x = x0 + bar_w * static_cast<double>(s);
            const double y = y_of(shown);
            c.body << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w * 0.92
                   << "\" height=\"" << c.margin_top + c.plot_height() - y << "\" fill=\""
                   << colors[s % 4] << "\"" << (inf ? " fill-opacity=\"0.45\"" : "") << "/>\n";
            if (inf) {
                c.body << "<text x=\"" << x + bar_w * 0.46 << "\" y=\"" << y - 4
                       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                          "font-size=\"10\">inf</text>\n";
            }
        }
        c.body << "<text x=\"" << x0 + px * 0.4 << "\" y=\""
               << c.margin_top + c.plot_height() + 16
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
               << data.categories[cat] << "</text>\n";
    }

    if (!data.overlay.empty()) {
        c.body << "<polyline fill=\"none\" stroke=\"#222\" stroke-width=\"2\" points=\"";
        for (std::size_t cat = 0; cat < n_cat; ++cat) {
            const double x = c.margin_left + px * (static_cast<double>(cat) + 0.5);
            const double y = c.margin_top + c.plot_height() * (1.0 - data.overlay[cat]);
            c.body << x << ',' << y << ' ';
        }
        c.body << "\"/>\n";
        for (std::size_t cat = 0; cat < n_cat; ++cat) {
            const double x = c.margin_left + px * (static_cast<double>(cat) + 0.5);
            const double y = c.margin_top + c.plot_height() * (1.0 - data.overlay[cat]);
            c.body << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#222\"/>\n";
        }
    }

    // legend
    double lx = c.margin_left + 8;
    for (std::size_t s = 0; s < n_series; ++s) {
        c.body << "<rect x=\"" << lx << "\" y=\"" << c.height - 14 << "\" width=\"10\" height=\"10\" fill=\""
               << colors[s % 4] << "\"/>\n<text x=\"" << lx + 14 << "\" y=\"" << c.height - 5
               << "\" font-family=\"sans-serif\" font-size=\"10\">" << data.series_names[s]
               << "</text>\n";
        lx += 16 + 7.0 * static_cast<double>(data.series_names[s].size());
    }
    if (!data.overlay.empty()) {
        c.body << "<line x1=\"" << lx << "\" y1=\"" << c.height - 9 << "\" x2=\"" << lx + 12
               << "\" y2=\"" << c.height - 9 << "\" stroke=\"#222\" stroke-width=\"2\"/>\n"
               << "<text x=\"" << lx + 16 << "\" y=\"" << c.height - 5
               << "\" font-family=\"sans-serif\" font-size=\"10\">" << data.overlay_name
               << " (right: 0..1)</text>\n";
    }
    return c.finish(title);
}

/// Simple multi-line chart over a shared x grid.
inline std::string line_chart(const std::vector<double>& xs,
                              const std::vector<std::pair<std::string, std::vector<double>>>& lines,
                              const std::string& x_label, const std::string& y_label,
                              const std::string& title) {
    Canvas c;
    double y_max = 0.0, y_min = 0.0;
    for (const auto& [name, ys] : lines) {
        for (double v : ys) {
            y_max = std::max(y_max, v);
            y_min = std::min(y_min, v);
        }
    }
    if (y_max == y_min) y_max = y_min + 1.0;
    const double x_min = xs.front(), x_max = xs.back() == xs.front() ? xs.front() + 1 : xs.back();
    auto px = [&](double x) {
        return c.margin_left + c.plot_width() * (x - x_min) / (x_max - x_min);
    };
    auto py = [&](double y) {
        return c.margin_top + c.plot_height() * (1.0 - (y - y_min) / (y_max - y_min));
    };

    c.body << "<line x1=\"" << c.margin_left << "\" y1=\"" << c.margin_top << "\" x2=\""
           << c.margin_left << "\" y2=\"" << c.margin_top + c.plot_height()
           << "\" stroke=\"black\"/>\n";
    c.body << "<line x1=\"" << c.margin_left << "\" y1=\"" << c.margin_top + c.plot_height()
           << "\" x2=\"" << c.margin_left + c.plot_width() << "\" y2=\""
           << c.margin_top + c.plot_height() << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = y_min + (y_max - y_min) * tick / 4.0;
        c.body << "<text x=\"" << c.margin_left - 6 << "\" y=\"" << py(v) + 4
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << num(v)
               << "</text>\n";
    }
    for (double x : xs) {
        c.body << "<text x=\"" << px(x) << "\" y=\"" << c.margin_top + c.plot_height() + 16
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
               << num(x) << "</text>\n";
    }
    c.body << "<text x=\"" << c.margin_left + c.plot_width() / 2 << "\" y=\"" << c.height - 8
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << x_label
           << "</text>\n";
    c.body << "<text x=\"14\" y=\"" << c.margin_top + c.plot_height() / 2
           << "\" transform=\"rotate(-90 14 " << c.margin_top + c.plot_height() / 2
           << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << y_label
           << "</text>\n";

    const char* colors[] = {"#4878a8", "#d1605e", "#6aa56e", "#b8860b"};
    double lx = c.margin_left + 8;
    for (std::size_t s = 0; s < lines.size(); ++s) {
        c.body << "<polyline fill=\"none\" stroke=\"" << colors[s % 4]
               << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            c.body << px(xs[i]) << ',' << py(lines[s].second[i]) << ' ';
        }
        c.body << "\"/>\n";
        c.body << "<line x1=\"" << lx << "\" y1=\"" << 24 << "\" x2=\"" << lx + 12 << "\" y2=\""
               << 24 << "\" stroke=\"" << colors[s % 4] << "\" stroke-width=\"2\"/>\n"
               << "<text x=\"" << lx + 16 << "\" y=\"" << 28
               << "\" font-family=\"sans-serif\" font-size=\"10\">" << lines[s].first
               << "</text>\n";
        lx += 20 + 7.0 * static_cast<double>(lines[s].first.size());
    }
    return c.finish(title);
}

/// Histogram as bars.
inline std::string histogram_chart(const std::vector<double>& edges,
                                   const std::vector<long long>& counts,
                                   const std::string& x_label, const std::string& title) {
    Canvas c;
    long long max_count = 1;
    for (long long v : counts) max_count = std::max(max_count, v);
    const double x_min = edges.front(), x_max = edges.back();
    auto px = [&](double x) {
        return c.margin_left + c.plot_width() * (x - x_min) / (x_max - x_min);
    };
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double x0 = px(edges[i]);
        const double x1 = px(edges[i + 1]);
        const double frac = static_cast<double>(counts[i]) / static_cast<double>(max_count);
        const double y = c.margin_top + c.plot_height() * (1.0 - frac);
        c.body << "<rect x=\"" << x0 << "\" y=\"" << y << "\" width=\"" << std::max(0.5, x1 - x0 - 0.5)
               << "\" height=\"" << c.margin_top + c.plot_height() - y
               << "\" fill=\"#4878a8\"/>\n";
    }
    c.body << "<line x1=\"" << c.margin_left << "\" y1=\"" << c.margin_top + c.plot_height()
           << "\" x2=\"" << c.margin_left + c.plot_width() << "\" y2=\""
           << c.margin_top + c.plot_height() << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = x_min + (x_max - x_min) * tick / 4.0;
        c.body << "<text x=\"" << px(v) << "\" y=\"" << c.margin_top + c.plot_height() + 16
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
               << num(v) << "</text>\n";
    }
    c.body << "<text x=\"" << c.margin_left + c.plot_width() / 2 << "\" y=\"" << c.height - 8
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << x_label
           << "</text>\n";
    return c.finish(title);
}

}  // namespace negbound::svg
