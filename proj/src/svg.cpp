// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace noiselab {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 400.0;
constexpr double kPad = 48.0;

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void take(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void widen() {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double unit(double v) const { return (v - lo) / (hi - lo); }
};

double px(double u) { return kPad + u * (kW - 2 * kPad); }
double py(double u) { return kH - kPad - u * (kH - 2 * kPad); }

void header(std::ofstream& os, const std::string& title) {
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << kW / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    os << "<line x1='" << kPad << "' y1='" << kH - kPad << "' x2='" << kW - kPad << "' y2='"
       << kH - kPad << "' stroke='black'/>\n";
    os << "<line x1='" << kPad << "' y1='" << kPad << "' x2='" << kPad << "' y2='" << kH - kPad
       << "' stroke='black'/>\n";
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<SvgSeries>& series) {
    std::ofstream os(path);
    if (!os) {
        return;  // best-effort only
    }
    Range ry;
    std::size_t n = 0;
    for (const auto& s : series) {
        n = std::max(n, s.y.size());
        for (double v : s.y) {
            ry.take(v);
        }
    }
    if (n < 2) {
        os << "<svg xmlns='http://www.w3.org/2000/svg'/>\n";
        return;
    }
    ry.widen();
    header(os, title);
    double ly = 36.0;
    for (const auto& s : series) {
        os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            os << px(static_cast<double>(i) / static_cast<double>(n - 1)) << "," << py(ry.unit(s.y[i]))
               << " ";
        }
        os << "'/>\n";
        os << "<text x='" << kW - kPad + 4 << "' y='" << ly << "' font-size='11' fill='" << s.color
           << "' text-anchor='end'>" << s.label << "</text>\n";
        ly += 14.0;
    }
    os << "</svg>\n";
}

void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& x_label, const std::string& y_label) {
    std::ofstream os(path);
    if (!os || x.size() != y.size() || x.empty()) {
        return;
    }
    Range rx, ry;
    for (double v : x) {
        rx.take(v);
    }
    for (double v : y) {
        ry.take(v);
    }
    rx.widen();
    ry.widen();
    header(os, title);
    os << "<text x='" << kW / 2 << "' y='" << kH - 12 << "' text-anchor='middle' font-size='11'>"
       << x_label << "</text>\n";
    os << "<text x='14' y='" << kH / 2 << "' font-size='11' transform='rotate(-90 14 " << kH / 2
       << ")' text-anchor='middle'>" << y_label << "</text>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << "<circle cx='" << px(rx.unit(x[i])) << "' cy='" << py(ry.unit(y[i]))
           << "' r='2.5' fill='#1f77b4' fill-opacity='0.7'/>\n";
    }
    os << "</svg>\n";
}

}  // namespace noiselab
