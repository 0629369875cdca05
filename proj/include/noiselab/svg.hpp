// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace noiselab {

// Minimal best-effort SVG plotting for trace and scatter views. Never
// load-bearing; callers may ignore failures.
struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> y;
};

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<SvgSeries>& series);

void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& x_label, const std::string& y_label);

}  // namespace noiselab
