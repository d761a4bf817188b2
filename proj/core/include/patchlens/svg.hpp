#pragma once

#include <string>
#include <vector>

namespace patchlens::svg {

enum class SeriesStyle { line, scatter };

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    SeriesStyle style = SeriesStyle::line;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 640;
    int height = 480;
};

// Renders axes, ticks, and each series as a polyline or circle markers.
// Coordinates are printed with fixed precision, so output is byte-stable.
std::string render(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace patchlens::svg
