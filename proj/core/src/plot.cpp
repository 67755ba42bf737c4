#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "smcgen/errors.hpp"
#include "smcgen/experiment.hpp"

namespace smcgen {

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points; // (x, y), x plotted on log2 axis
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

std::string trim_number(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.4g", v);
    return buffer;
}

// Minimal line chart: log2-scaled x axis, linear y axis, legend top-left.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    if (series.empty()) throw InputError("plot: no series");
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (!(x_min > 0.0)) throw InputError("plot: log axis needs positive abscissae");
    if (y_min == y_max) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double width = 640.0, height = 420.0;
    const double left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const double lx_min = std::log2(x_min), lx_max = std::log2(x_max);
    auto sx = [&](double x) {
        return lx_max > lx_min
                   ? left + (std::log2(x) - lx_min) / (lx_max - lx_min) * plot_w
                   : left + plot_w / 2.0;
    };
    auto sy = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write plot to " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";

    // Axes.
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << top + plot_h / 2 << ")\">" << y_label << "</text>\n";

    // x ticks at the observed abscissae (powers of two in practice).
    std::set<double> xs;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) xs.insert(x);
    for (double x : xs) {
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << top + plot_h << "\" x2=\"" << sx(x)
            << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(x) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\" font-size=\"10\">" << trim_number(x) << "</text>\n";
    }
    // Four y ticks.
    for (int i = 0; i <= 3; ++i) {
        const double y = y_min + (y_max - y_min) * i / 3.0;
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(y) << "\" x2=\"" << left
            << "\" y2=\"" << sy(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 3
            << "\" text-anchor=\"end\" font-size=\"10\">" << trim_number(y) << "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[s].points) out << sx(x) << ',' << sy(y) << ' ';
        out << "\"/>\n";
        for (const auto& [x, y] : series[s].points)
            out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\""
                << color << "\"/>\n";
        out << "<text x=\"" << left + 10 << "\" y=\"" << top + 14 + 14 * static_cast<double>(s)
            << "\" font-size=\"11\" fill=\"" << color << "\">" << series[s].name << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace

void emit_plots(const std::vector<HeightSummaryRow>& rows, const std::string& dir) {
    if (rows.empty()) throw InputError("plot: empty summary");
    std::set<int> particle_counts;
    for (const auto& row : rows) particle_counts.insert(row.num_particles);

    for (int num_particles : particle_counts) {
        // Scheme order as first encountered keeps series stable across runs.
        std::vector<std::string> schemes;
        std::map<std::string, Series> mean_series, var_series;
        for (const auto& row : rows) {
            if (row.num_particles != num_particles) continue;
            if (mean_series.find(row.scheme) == mean_series.end()) {
                schemes.push_back(row.scheme);
                mean_series[row.scheme].name = row.scheme;
                var_series[row.scheme].name = row.scheme;
            }
            mean_series[row.scheme].points.emplace_back(row.num_leaves, row.mean_rescaled);
            var_series[row.scheme].points.emplace_back(row.num_leaves, row.var_rescaled);
        }
        std::vector<Series> means, vars;
        for (const auto& scheme : schemes) {
            auto m = mean_series[scheme];
            auto v = var_series[scheme];
            std::sort(m.points.begin(), m.points.end());
            std::sort(v.points.begin(), v.points.end());
            means.push_back(std::move(m));
            vars.push_back(std::move(v));
        }
        const std::string suffix = "_N" + std::to_string(num_particles) + ".svg";
        write_line_chart(dir + "/tree_height_mean" + suffix,
                         "Mean tree height, N = " + std::to_string(num_particles),
                         "leaves n (log scale)", "mean height (coalescent units)", means);
        write_line_chart(dir + "/tree_height_variance" + suffix,
                         "Tree height variance, N = " + std::to_string(num_particles),
                         "leaves n (log scale)", "height variance (coalescent units)", vars);
    }
}

} // namespace smcgen
