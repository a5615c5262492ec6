#pragma once

#include <string>
#include <vector>

#include "loadcast/timegrid.hpp"

namespace loadcast {

// Centered 15-day rolling average on the series' grid; windows are trimmed at
// the edges and skip missing values.
std::vector<double> rolling_average(const std::vector<double>& x, const TimeGrid& grid,
                                    int64_t window_days = 15);

struct PlotSeries {
    std::string name;
    std::vector<int64_t> timestamps;
    std::vector<double> values;
};

// Long-format tidy CSV: series,timestamp,value.
void write_plot_csv(const std::string& path, const std::vector<PlotSeries>& series);

// Minimal static SVG: one polyline per series plus axes. Intended as a quick
// visual check, not publication output.
void write_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, int width = 960, int height = 420);

enum class PlotKind { ResidualsSegments, IndexComparison, ScatterEffect };
PlotKind plot_kind_from_string(const std::string& name);

}  // namespace loadcast
