#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shadowlab::svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool line = false;  // polyline instead of scatter markers
    std::string color = "#1f77b4";
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

// Deterministic SVG text (fixed number formatting, no timestamps).
std::string render(const Plot& plot, int width = 640, int height = 480);

}  // namespace shadowlab::svg
