#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>

#include "seqmed/harness.hpp"
#include "seqmed/io.hpp"

namespace seqmed {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 70;
constexpr double kRight = 180;
constexpr double kTop = 30;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_plot(const std::vector<SummaryRow>& summary) {
    if (summary.empty()) throw std::invalid_argument("plot: summary is empty");

    std::vector<std::string> models;
    std::map<std::string, std::vector<SummaryRow>> series;
    int t_min = summary.front().t;
    int t_max = t_min;
    double y_min = 1.0;
    double y_max = 0.0;
    for (const auto& s : summary) {
        if (!series.count(s.model)) models.push_back(s.model);
        series[s.model].push_back(s);
        t_min = std::min(t_min, s.t);
        t_max = std::max(t_max, s.t);
        y_min = std::min(y_min, s.mean - s.stddev);
        y_max = std::max(y_max, s.mean + s.stddev);
    }
    for (auto& [name, rows] : series) {
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    }
    y_min = std::max(0.0, std::floor(y_min * 20.0) / 20.0);
    y_max = std::min(1.0, std::ceil(y_max * 20.0) / 20.0);
    if (y_max - y_min < 0.05) {
        y_min = std::max(0.0, y_min - 0.05);
        y_max = std::min(1.0, y_max + 0.05);
    }

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](double t) {
        if (t_max == t_min) return kLeft + plot_w / 2.0;
        return kLeft + plot_w * (t - t_min) / (t_max - t_min);
    };
    auto y_of = [&](double a) { return kTop + plot_h * (1.0 - (a - y_min) / (y_max - y_min)); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(kLeft + plot_w) +
           "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(kTop + plot_h) + "\"/>\n</g>\n";

    svg += "<g id=\"ticks\" fill=\"black\">\n";
    const int span = t_max - t_min;
    const int step = std::max(1, span / 10 + (span % 10 ? 1 : 0));
    for (int t = t_min; t <= t_max; t += step) {
        svg += "<text x=\"" + fmt(x_of(t)) + "\" y=\"" + fmt(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
               std::to_string(t) + "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
        const double a = y_min + (y_max - y_min) * k / 5.0;
        svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y_of(a) + 4) + "\" text-anchor=\"end\">" + fmt(a) +
               "</text>\n";
    }
    svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 15) +
           "\" text-anchor=\"middle\">time point</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           fmt(kTop + plot_h / 2) + ")\">test accuracy</text>\n</g>\n";

    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& rows = series[models[m]];
        const std::string color = kPalette[m % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg += "<g class=\"curve\" data-model=\"" + escape(models[m]) + "\">\n";
        std::string band;
        for (const auto& r : rows) band += fmt(x_of(r.t)) + "," + fmt(y_of(std::min(1.0, r.mean + r.stddev))) + " ";
        for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
            band += fmt(x_of(it->t)) + "," + fmt(y_of(std::max(0.0, it->mean - it->stddev))) + " ";
        }
        band.pop_back();
        if (rows.size() > 1) {
            svg += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
            std::string line;
            for (const auto& r : rows) line += fmt(x_of(r.t)) + "," + fmt(y_of(r.mean)) + " ";
            line.pop_back();
            svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        } else {
            const auto& r = rows.front();
            svg += "<line x1=\"" + fmt(x_of(r.t)) + "\" y1=\"" + fmt(y_of(std::min(1.0, r.mean + r.stddev))) +
                   "\" x2=\"" + fmt(x_of(r.t)) + "\" y2=\"" + fmt(y_of(std::max(0.0, r.mean - r.stddev))) +
                   "\" stroke=\"" + color + "\" stroke-opacity=\"0.4\" stroke-width=\"6\"/>\n";
        }
        for (const auto& r : rows) {
            svg += "<circle cx=\"" + fmt(x_of(r.t)) + "\" cy=\"" + fmt(y_of(r.mean)) + "\" r=\"3\" fill=\"" + color +
                   "\"/>\n";
        }
        const double ly = kTop + 10 + 20.0 * static_cast<double>(m);
        svg += "<line x1=\"" + fmt(kWidth - kRight + 15) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
               fmt(kWidth - kRight + 40) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(kWidth - kRight + 46) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(models[m]) +
               "</text>\n</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const std::filesystem::path& summary_path, const std::filesystem::path& out_path) {
    write_file_atomic(out_path, render_plot(read_summary_csv(summary_path)));
}

}  // namespace seqmed
