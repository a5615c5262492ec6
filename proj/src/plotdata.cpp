#include "loadcast/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "loadcast/csv.hpp"

namespace loadcast {

std::vector<double> rolling_average(const std::vector<double>& x, const TimeGrid& grid,
                                    int64_t window_days) {
    const int64_t half = (window_days * kStepDay / grid.step()) / 2;
    const auto n = static_cast<int64_t>(x.size());
    std::vector<double> out(x.size(), missing());
    // Prefix sums over non-missing values keep this linear.
    std::vector<double> sum(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int64_t> cnt(static_cast<size_t>(n) + 1, 0);
    for (int64_t i = 0; i < n; ++i) {
        bool ok = !is_missing(x[static_cast<size_t>(i)]);
        sum[i + 1] = sum[i] + (ok ? x[static_cast<size_t>(i)] : 0.0);
        cnt[i + 1] = cnt[i] + (ok ? 1 : 0);
    }
    for (int64_t i = 0; i < n; ++i) {
        int64_t lo = std::max<int64_t>(0, i - half);
        int64_t hi = std::min<int64_t>(n, i + half + 1);
        int64_t c = cnt[hi] - cnt[lo];
        if (c > 0) out[static_cast<size_t>(i)] = (sum[hi] - sum[lo]) / static_cast<double>(c);
    }
    return out;
}

void write_plot_csv(const std::string& path, const std::vector<PlotSeries>& series) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : series)
        for (size_t i = 0; i < s.timestamps.size(); ++i)
            rows.push_back(
                {s.name, format_timestamp(s.timestamps[i]), format_double(s.values[i])});
    write_csv(path, {"series", "timestamp", "value"}, rows);
}

void write_plot_svg(const std::string& path, const std::vector<PlotSeries>& series,
                    const std::string& title, int width, int height) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");

    int64_t tmin = std::numeric_limits<int64_t>::max(), tmax = std::numeric_limits<int64_t>::min();
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& s : series)
        for (size_t i = 0; i < s.timestamps.size(); ++i) {
            if (is_missing(s.values[i])) continue;
            tmin = std::min(tmin, s.timestamps[i]);
            tmax = std::max(tmax, s.timestamps[i]);
            vmin = std::min(vmin, s.values[i]);
            vmax = std::max(vmax, s.values[i]);
        }
    if (tmin >= tmax) tmax = tmin + 1;
    if (!(vmin < vmax)) vmax = vmin + 1.0;

    const double ml = 60, mr = 15, mt = 30, mb = 35;
    auto sx = [&](int64_t t) {
        return ml + (width - ml - mr) * static_cast<double>(t - tmin) /
                        static_cast<double>(tmax - tmin);
    };
    auto sy = [&](double v) { return mt + (height - mt - mb) * (1.0 - (v - vmin) / (vmax - vmin)); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<text x=\"" << ml << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"5\" y=\"" << sy(vmax) + 4 << "\" font-size=\"10\">" << format_double(vmax)
        << "</text>\n";
    out << "<text x=\"5\" y=\"" << sy(vmin) + 4 << "\" font-size=\"10\">" << format_double(vmin)
        << "</text>\n";
    out << "<text x=\"" << ml << "\" y=\"" << height - 10 << "\" font-size=\"10\">"
        << format_date(tmin) << "</text>\n";
    out << "<text x=\"" << width - mr - 70 << "\" y=\"" << height - 10 << "\" font-size=\"10\">"
        << format_date(tmax) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill=\"none\" stroke=\"" << colors[si % 6]
            << "\" stroke-width=\"1\" points=\"";
        bool pen_down = false;
        for (size_t i = 0; i < s.timestamps.size(); ++i) {
            if (is_missing(s.values[i])) {
                pen_down = false;
                continue;
            }
            if (!pen_down && i > 0) out << "\" /><polyline fill=\"none\" stroke=\""
                                        << colors[si % 6] << "\" stroke-width=\"1\" points=\"";
            out << sx(s.timestamps[i]) << "," << sy(s.values[i]) << " ";
            pen_down = true;
        }
        out << "\" />\n";
        out << "<text x=\"" << width - mr - 120 << "\" y=\"" << mt + 14 * (si + 1)
            << "\" font-size=\"10\" fill=\"" << colors[si % 6] << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
}

PlotKind plot_kind_from_string(const std::string& name) {
    if (name == "residuals+segments" || name == "residuals") return PlotKind::ResidualsSegments;
    if (name == "index-comparison") return PlotKind::IndexComparison;
    if (name == "scatter-effect") return PlotKind::ScatterEffect;
    throw DataError("unknown plot kind '" + name + "'");
}

}  // namespace loadcast
