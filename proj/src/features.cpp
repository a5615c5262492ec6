#include "loadcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace loadcast {

std::vector<double> exp_smooth(const std::vector<double>& x, double alpha) {
    if (alpha < 0.0 || alpha >= 1.0) throw DataError("smoothing factor must be in [0,1)");
    std::vector<double> s(x.size());
    if (x.empty()) return s;
    if (is_missing(x[0])) throw DataError("exp_smooth requires a complete series");
    s[0] = x[0];
    for (size_t k = 1; k < x.size(); ++k) {
        if (is_missing(x[k])) throw DataError("exp_smooth requires a complete series");
        s[k] = alpha * s[k - 1] + (1.0 - alpha) * x[k];
    }
    return s;
}

DailyExtrema running_extrema_by_day(const std::vector<double>& s, const TimeGrid& grid) {
    if (grid.step() != kStepHalfHour)
        throw DataError("running extrema require a half-hourly grid");
    DailyExtrema out;
    out.min_so_far.resize(s.size());
    out.max_so_far.resize(s.size());
    double lo = 0.0, hi = 0.0;
    int64_t current_day = std::numeric_limits<int64_t>::min();
    for (int64_t k = 0; k < grid.count(); ++k) {
        int64_t day = grid.at(k) / kStepDay;
        if (day != current_day) {
            current_day = day;
            lo = s[k];
            hi = s[k];
        } else {
            lo = std::min(lo, s[k]);
            hi = std::max(hi, s[k]);
        }
        out.min_so_far[k] = lo;
        out.max_so_far[k] = hi;
    }
    return out;
}

double time_of_year(int64_t timestamp) {
    CivilTime ct = civil_from_timestamp(timestamp);
    int64_t year_start = days_from_civil(ct.date.year, 1, 1) * kStepDay;
    // Last grid instant of the year (Dec 31 23:30) maps exactly to 1.
    double span = static_cast<double>(year_length_days(ct.date.year)) * kStepDay - kStepHalfHour;
    return static_cast<double>(timestamp - year_start) / span;
}

std::vector<double> lag(const std::vector<double>& x, int64_t k) {
    if (k < 1) throw DataError("lag must be at least 1");
    std::vector<double> y(x.size(), missing());
    for (size_t t = static_cast<size_t>(std::min<int64_t>(k, x.size())); t < x.size(); ++t)
        y[t] = x[t - k];
    return y;
}

double mean_ignore_missing(const std::vector<double>& x) {
    double acc = 0.0;
    int64_t n = 0;
    for (double v : x)
        if (!is_missing(v)) {
            acc += v;
            ++n;
        }
    if (n == 0) throw DataError("mean of an all-missing series");
    return acc / static_cast<double>(n);
}

double sd_ignore_missing(const std::vector<double>& x) {
    double m = mean_ignore_missing(x);
    double acc = 0.0;
    int64_t n = 0;
    for (double v : x)
        if (!is_missing(v)) {
            acc += (v - m) * (v - m);
            ++n;
        }
    return std::sqrt(acc / static_cast<double>(n));
}

std::vector<double> zscore(const std::vector<double>& x) {
    double m = mean_ignore_missing(x);
    double s = sd_ignore_missing(x);
    if (s == 0.0) throw DataError("zscore of a constant series");
    std::vector<double> out(x.size(), missing());
    for (size_t k = 0; k < x.size(); ++k)
        if (!is_missing(x[k])) out[k] = (x[k] - m) / s;
    return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y, int64_t lag_steps,
               const std::vector<bool>* include) {
    if (x.size() != y.size()) throw DataError("pearson requires equal-length series");
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    int64_t n = 0;
    for (size_t t = 0; t < x.size(); ++t) {
        int64_t j = static_cast<int64_t>(t) - lag_steps;
        if (j < 0 || j >= static_cast<int64_t>(y.size())) continue;
        if (include && !(*include)[t]) continue;
        double a = x[t], b = y[j];
        if (is_missing(a) || is_missing(b)) continue;
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
        ++n;
    }
    if (n < 3) throw DataError("pearson: fewer than 3 overlapping pairs");
    double nd = static_cast<double>(n);
    double cov = sxy - sx * sy / nd;
    double vx = sxx - sx * sx / nd;
    double vy = syy - sy * sy / nd;
    if (vx <= 0.0 || vy <= 0.0) throw NumericError("pearson: zero variance");
    return cov / std::sqrt(vx * vy);
}

SeriesFrame build_design(const SeriesFrame& frame, const std::vector<CalendarRow>& calendar,
                         const std::vector<MobilityIndices>& mobility) {
    const TimeGrid& grid = frame.grid();
    if (grid.step() != kStepHalfHour) throw DataError("design grid must be half-hourly");
    for (const char* required : {col::kLoad, col::kTemp})
        if (!frame.has_column(required))
            throw DataError(std::string("missing prerequisite column '") + required + "'");

    const auto& load = frame.column(col::kLoad);
    const auto& temp = frame.column(col::kTemp);
    const int64_t n = grid.count();

    SeriesFrame out(grid);
    out.add_column(col::kLoad, load);
    out.add_column(col::kTemp, temp);
    out.add_column(col::kTemp95, exp_smooth(temp, 0.95));
    out.add_column(col::kTemp99, exp_smooth(temp, 0.99));
    DailyExtrema ext = running_extrema_by_day(out.column(col::kTemp99), grid);
    out.add_column(col::kTempMin99, std::move(ext.min_so_far));
    out.add_column(col::kTempMax99, std::move(ext.max_so_far));

    std::vector<double> toy(n), trend(n), halfhour(n);
    for (int64_t k = 0; k < n; ++k) {
        int64_t t = grid.at(k);
        toy[k] = time_of_year(t);
        trend[k] = static_cast<double>(t - grid.start()) / static_cast<double>(kStepDay);
        halfhour[k] = static_cast<double>((t % kStepDay) / kStepHalfHour);
    }
    out.add_column(col::kToY, std::move(toy));
    out.add_column(col::kTrend, std::move(trend));
    out.add_column(col::kHalfHour, std::move(halfhour));

    std::map<int64_t, const CalendarRow*> cal_by_day;
    for (const auto& r : calendar) cal_by_day[r.day / kStepDay] = &r;
    std::vector<double> daytype(n, missing()), dls(n, missing()), holiday(n, missing()),
        school_a(n, missing()), school_b(n, missing()), school_c(n, missing()),
        summer(n, missing());
    for (int64_t k = 0; k < n; ++k) {
        auto it = cal_by_day.find(grid.at(k) / kStepDay);
        if (it == cal_by_day.end()) continue;
        const CalendarRow& r = *it->second;
        daytype[k] = r.day_type;
        dls[k] = r.dls ? 1.0 : 0.0;
        holiday[k] = r.holiday ? 1.0 : 0.0;
        school_a[k] = r.school_holiday_a ? 1.0 : 0.0;
        school_b[k] = r.school_holiday_b ? 1.0 : 0.0;
        school_c[k] = r.school_holiday_c ? 1.0 : 0.0;
        summer[k] = r.summer_holiday ? 1.0 : 0.0;
    }
    out.add_column(col::kDayType, std::move(daytype));
    out.add_column(col::kDls, std::move(dls));
    out.add_column(col::kHoliday, std::move(holiday));
    out.add_column(col::kSchoolA, std::move(school_a));
    out.add_column(col::kSchoolB, std::move(school_b));
    out.add_column(col::kSchoolC, std::move(school_c));
    out.add_column(col::kSummerHoliday, std::move(summer));

    out.add_column(col::kLoad1D, lag(load, kHalfHoursPerDay));
    out.add_column(col::kLoad1W, lag(load, 7 * kHalfHoursPerDay));

    // Daily mobility indices held constant through the day.
    std::vector<double> work(n, missing()), tourism(n, missing()), resident(n, missing());
    if (!mobility.empty()) {
        std::map<int64_t, const MobilityIndices*> mob_by_day;
        for (const auto& m : mobility) mob_by_day[m.day / kStepDay] = &m;
        for (int64_t k = 0; k < n; ++k) {
            auto it = mob_by_day.find(grid.at(k) / kStepDay);
            if (it == mob_by_day.end()) continue;
            work[k] = it->second->work;
            tourism[k] = it->second->tourism;
            resident[k] = it->second->resident;
        }
    }
    out.add_column(col::kWork, std::move(work));
    out.add_column(col::kTourism, std::move(tourism));
    out.add_column(col::kResident, std::move(resident));

    return deletion_mask(out, {col::kWork, col::kTourism, col::kResident});
}

}  // namespace loadcast
