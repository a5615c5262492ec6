#pragma once

#include <vector>

#include "loadcast/csv.hpp"
#include "loadcast/timegrid.hpp"

namespace loadcast {

// s(0) = x(0); s(k) = alpha*s(k-1) + (1-alpha)*x(k). Requires a complete series.
std::vector<double> exp_smooth(const std::vector<double>& x, double alpha);

// Cumulative min/max of a half-hourly series, reset at each civil midnight,
// inclusive of the current instant.
struct DailyExtrema {
    std::vector<double> min_so_far;
    std::vector<double> max_so_far;
};
DailyExtrema running_extrema_by_day(const std::vector<double>& s, const TimeGrid& grid);

// 0 at Jan 1 00:00, 1 at Dec 31 23:30, linear, normalized by the year length.
double time_of_year(int64_t timestamp);

// y(t) = x(t-k), first k cells missing.
std::vector<double> lag(const std::vector<double>& x, int64_t k);

// Standardize to mean 0, sd 1 over non-missing entries (population sd).
std::vector<double> zscore(const std::vector<double>& x);
double mean_ignore_missing(const std::vector<double>& x);
double sd_ignore_missing(const std::vector<double>& x);

// Product-moment correlation of x(t) and y(t-lag) on the overlap, optionally
// restricted by an inclusion mask aligned with x.
double pearson(const std::vector<double>& x, const std::vector<double>& y, int64_t lag_steps = 0,
               const std::vector<bool>* include = nullptr);

// Column names emitted by build_design.
namespace col {
inline constexpr const char* kLoad = "load";
inline constexpr const char* kTemp = "temp";
inline constexpr const char* kTemp95 = "temp95";
inline constexpr const char* kTemp99 = "temp99";
inline constexpr const char* kTempMin99 = "tempmin99";
inline constexpr const char* kTempMax99 = "tempmax99";
inline constexpr const char* kToY = "toy";
inline constexpr const char* kTrend = "trend";
inline constexpr const char* kDayType = "daytype";
inline constexpr const char* kDls = "dls";
inline constexpr const char* kHoliday = "holiday";
inline constexpr const char* kSchoolA = "school_a";
inline constexpr const char* kSchoolB = "school_b";
inline constexpr const char* kSchoolC = "school_c";
inline constexpr const char* kSummerHoliday = "summer_holiday";
inline constexpr const char* kLoad1D = "load1d";
inline constexpr const char* kLoad1W = "load1w";
inline constexpr const char* kWork = "work";
inline constexpr const char* kTourism = "tourism";
inline constexpr const char* kResident = "resident";
inline constexpr const char* kHalfHour = "halfhour";
}  // namespace col

// Assembles the full regressor frame on the grid of `frame` (half-hourly,
// must carry `load` and `temp`). Mobility columns are all-missing when the
// mobility table is empty; `available` marks rows where they are present.
SeriesFrame build_design(const SeriesFrame& frame, const std::vector<CalendarRow>& calendar,
                         const std::vector<MobilityIndices>& mobility);

}  // namespace loadcast
