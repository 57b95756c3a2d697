#pragma once

#include <string>
#include <vector>

namespace mvf::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "black";
    bool line = false; // polyline instead of dots
    double radius = 1.6;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool diagonal = false; // draw y = x reference
};

/// Static, script-free SVG with the panels laid out left to right.
/// Non-finite points are skipped.
std::string render(const std::vector<Panel>& panels, int panel_width = 420, int panel_height = 380);

} // namespace mvf::svg
