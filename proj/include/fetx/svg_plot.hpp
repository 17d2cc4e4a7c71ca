#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fetx {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;

/// Static 800x600 line chart with axes, decade or linear ticks and a legend.
std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);
void save_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace fetx
