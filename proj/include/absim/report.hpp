#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace absim {

// Number formatting shared by all CSV emitters: shortest representation at
// up to 9 significant digits; infinities are written as "inf".
std::string format_value(double v);

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

// One polyline on a chart.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal SVG line chart with axes, ticks and a legend; enough to eyeball
// MTF curves, metric sweeps and loss logs without external tooling.
void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace absim
