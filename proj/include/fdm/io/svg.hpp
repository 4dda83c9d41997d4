#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fdm::io {

struct SvgSeries {
    std::string name;
    std::string color = "#1f77b4";
    std::vector<double> x, y;
};

// Minimal line chart with axes, used for trajectory/report inspection.
void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, int width = 860, int height = 560);

}  // namespace fdm::io
