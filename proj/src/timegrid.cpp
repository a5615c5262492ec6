#include "loadcast/timegrid.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace loadcast {

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int year_length_days(int year) { return is_leap_year(year) ? 366 : 365; }

int64_t days_from_civil(int year, int month, int day) {
    year -= month <= 2;
    const int64_t era = (year >= 0 ? year : year - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(year - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

CivilDate civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    CivilDate out;
    out.year = static_cast<int>(y + (m <= 2));
    out.month = static_cast<int>(m);
    out.day = static_cast<int>(d);
    return out;
}

int weekday_1to7(int64_t timestamp) {
    int64_t days = timestamp / kStepDay;
    if (timestamp < 0 && timestamp % kStepDay != 0) --days;
    // 1970-01-01 was a Thursday (=4).
    int w = static_cast<int>((days + 3) % 7);
    if (w < 0) w += 7;
    return w + 1;
}

int64_t timestamp_from_civil(const CivilTime& ct) {
    return days_from_civil(ct.date.year, ct.date.month, ct.date.day) * kStepDay +
           ct.hour * 3600 + ct.minute * 60 + ct.second;
}

CivilTime civil_from_timestamp(int64_t t) {
    int64_t days = t / kStepDay;
    int64_t sod = t % kStepDay;
    if (sod < 0) {
        sod += kStepDay;
        --days;
    }
    CivilTime out;
    out.date = civil_from_days(days);
    out.hour = static_cast<int>(sod / 3600);
    out.minute = static_cast<int>((sod % 3600) / 60);
    out.second = static_cast<int>(sod % 60);
    return out;
}

int64_t parse_timestamp(const std::string& iso) {
    std::string s = iso;
    while (!s.empty() && (s.back() == 'Z' || s.back() == ' ' || s.back() == '\r')) s.pop_back();
    size_t start = 0;
    while (start < s.size() && s[start] == ' ') ++start;
    s = s.substr(start);

    CivilTime ct;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%d%n", &ct.date.year, &ct.date.month, &ct.date.day,
                    &consumed) != 3) {
        throw DataError("bad timestamp '" + iso + "'");
    }
    if (static_cast<size_t>(consumed) < s.size()) {
        char sep = s[consumed];
        if (sep != 'T' && sep != ' ')
            throw DataError("bad timestamp '" + iso + "'");
        const char* rest = s.c_str() + consumed + 1;
        int n = std::sscanf(rest, "%d:%d:%d", &ct.hour, &ct.minute, &ct.second);
        if (n < 2) throw DataError("bad timestamp '" + iso + "'");
        if (n == 2) ct.second = 0;
    }
    if (ct.date.month < 1 || ct.date.month > 12 || ct.date.day < 1 || ct.date.day > 31 ||
        ct.hour < 0 || ct.hour > 23 || ct.minute < 0 || ct.minute > 59 || ct.second < 0 ||
        ct.second > 60) {
        throw DataError("bad timestamp '" + iso + "'");
    }
    return timestamp_from_civil(ct);
}

std::string format_timestamp(int64_t t) {
    CivilTime ct = civil_from_timestamp(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", ct.date.year, ct.date.month,
                  ct.date.day, ct.hour, ct.minute, ct.second);
    return std::string(buf);
}

std::string format_date(int64_t t) {
    CivilTime ct = civil_from_timestamp(t);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", ct.date.year, ct.date.month, ct.date.day);
    return std::string(buf);
}

namespace {
int64_t last_sunday_of(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int len = lengths[month - 1] + (month == 2 && is_leap_year(year) ? 1 : 0);
    int64_t day = days_from_civil(year, month, len);
    int w = weekday_1to7(day * kStepDay);  // 7 = Sunday
    return day - (w % 7);
}
}  // namespace

bool daylight_saving_flag(int64_t timestamp) {
    CivilTime ct = civil_from_timestamp(timestamp);
    int64_t day = days_from_civil(ct.date.year, ct.date.month, ct.date.day);
    return day >= last_sunday_of(ct.date.year, 3) && day < last_sunday_of(ct.date.year, 10);
}

// --------------------------------------------------------------------------

TimeGrid::TimeGrid(int64_t start, int64_t step, int64_t count)
    : start_(start), step_(step), count_(count) {
    if (step != kStepHalfHour && step != kStepThreeHours && step != kStepDay)
        throw DataError("unsupported grid step " + std::to_string(step) + "s");
    if (count <= 0) throw DataError("grid count must be positive");
}

int64_t TimeGrid::at(int64_t k) const {
    if (k < 0 || k >= count_) throw DataError("grid index out of range");
    return start_ + k * step_;
}

int64_t TimeGrid::index_of(int64_t t) const {
    int64_t off = t - start_;
    if (off < 0 || off % step_ != 0) return -1;
    int64_t k = off / step_;
    return k < count_ ? k : -1;
}

int64_t TimeGrid::cell_of(int64_t t) const {
    int64_t off = t - start_;
    if (off < 0) return -1;
    int64_t k = off / step_;
    return k < count_ ? k : -1;
}

TimeGrid build_grid(int64_t start, int64_t end, int64_t step) {
    if (start >= end) throw DataError("grid start must precede end");
    int64_t span = end - start;
    if (span % step != 0)
        throw DataError("grid span " + std::to_string(span) + "s is not divisible by step " +
                        std::to_string(step) + "s");
    return TimeGrid(start, step, span / step);
}

// --------------------------------------------------------------------------

void SeriesFrame::add_column(const std::string& name, std::vector<double> values) {
    if (cols_.count(name)) throw DataError("duplicate column '" + name + "'");
    if (static_cast<int64_t>(values.size()) != grid_.count())
        throw DataError("column '" + name + "' has " + std::to_string(values.size()) +
                        " entries, grid has " + std::to_string(grid_.count()));
    order_.push_back(name);
    cols_.emplace(name, std::move(values));
}

void SeriesFrame::set_column(const std::string& name, std::vector<double> values) {
    if (!cols_.count(name)) {
        add_column(name, std::move(values));
        return;
    }
    if (static_cast<int64_t>(values.size()) != grid_.count())
        throw DataError("column '" + name + "' has wrong length");
    cols_[name] = std::move(values);
}

const std::vector<double>& SeriesFrame::column(const std::string& name) const {
    auto it = cols_.find(name);
    if (it == cols_.end()) throw DataError("missing column '" + name + "'");
    return it->second;
}

// --------------------------------------------------------------------------

bool within_mainland_france(double lat, double lon) {
    return lat >= 41.0 && lat <= 51.5 && lon >= -5.5 && lon <= 10.0;
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kRadiusKm = 6371.0;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    double dlat = (lat2 - lat1) * kDeg;
    double dlon = (lon2 - lon1) * kDeg;
    double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
               std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) *
                   std::sin(dlon / 2);
    return 2.0 * kRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<StationSeries> order_by_distance(const StationSeries& target,
                                             const std::vector<StationSeries>& all) {
    std::vector<StationSeries> out;
    out.reserve(all.size());
    for (const auto& s : all)
        if (s.station_id != target.station_id) out.push_back(s);
    std::stable_sort(out.begin(), out.end(), [&](const StationSeries& a, const StationSeries& b) {
        double da = great_circle_km(target.lat, target.lon, a.lat, a.lon);
        double db = great_circle_km(target.lat, target.lon, b.lat, b.lon);
        if (da != db) return da < db;
        return a.station_id < b.station_id;
    });
    return out;
}

StationSeries impute_station(const StationSeries& series,
                             const std::vector<StationSeries>& neighbors, ImputeReport* report) {
    StationSeries out = series;
    const auto& grid = series.grid;
    const int64_t step_cells = kStepThreeHours / grid.step();
    const int64_t day_cells = kStepDay / grid.step();

    for (int64_t k = 0; k < grid.count(); ++k) {
        if (!is_missing(series.values[k])) continue;
        int64_t t = grid.at(k);

        // Rule 1: mean of the 3h-before and 3h-after original values.
        double before = missing(), after = missing();
        if (k - step_cells >= 0) before = series.values[k - step_cells];
        if (k + step_cells < grid.count()) after = series.values[k + step_cells];
        if (!is_missing(before) && !is_missing(after)) {
            out.values[k] = 0.5 * (before + after);
            if (report) ++report->filled_time_mean;
            continue;
        }

        // Rule 2: nearest station with a value at t.
        bool filled = false;
        for (const auto& nb : neighbors) {
            int64_t j = nb.grid.index_of(t);
            if (j >= 0 && !is_missing(nb.values[j])) {
                out.values[k] = nb.values[j];
                if (report) ++report->filled_neighbor;
                filled = true;
                break;
            }
        }
        if (filled) continue;

        // Rule 3: mean of the same hour the day before and the day after.
        double prev = missing(), next = missing();
        if (k - day_cells >= 0) prev = series.values[k - day_cells];
        if (k + day_cells < grid.count()) next = series.values[k + day_cells];
        if (!is_missing(prev) && !is_missing(next)) {
            out.values[k] = 0.5 * (prev + next);
            if (report) ++report->filled_day_mean;
            continue;
        }

        if (report) report->unrecoverable.push_back(t);
    }
    return out;
}

std::vector<double> regional_mean_temperature(const std::vector<StationSeries>& stations,
                                              const std::vector<double>& weights) {
    if (stations.empty()) throw DataError("regional mean requires at least one station");
    const TimeGrid& grid = stations.front().grid;
    for (const auto& s : stations)
        if (!(s.grid == grid)) throw DataError("stations are not on a common grid");

    std::vector<double> w = weights;
    if (w.empty()) {
        w.assign(stations.size(), 1.0 / static_cast<double>(stations.size()));
    } else {
        if (w.size() != stations.size())
            throw DataError("weight count does not match station count");
        double sum = 0.0;
        for (double x : w) {
            if (x < 0.0) throw DataError("station weights must be nonnegative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw DataError("station weights must sum to 1");
    }

    std::vector<double> out(grid.count(), missing());
    for (int64_t k = 0; k < grid.count(); ++k) {
        double acc = 0.0, wsum = 0.0;
        for (size_t i = 0; i < stations.size(); ++i) {
            double v = stations[i].values[k];
            if (is_missing(v)) continue;
            acc += w[i] * v;
            wsum += w[i];
        }
        if (wsum > 0.0) out[k] = acc / wsum;
    }
    return out;
}

std::vector<double> upsample_hold(const std::vector<double>& coarse, const TimeGrid& coarse_grid,
                                  const TimeGrid& target) {
    if (coarse_grid.step() % target.step() != 0)
        throw DataError("coarse step is not a multiple of target step");
    if (static_cast<int64_t>(coarse.size()) != coarse_grid.count())
        throw DataError("coarse column length does not match its grid");

    std::vector<double> out(target.count(), missing());
    for (int64_t k = 0; k < target.count(); ++k) {
        int64_t cell = coarse_grid.cell_of(target.at(k));
        if (cell >= 0) out[k] = coarse[cell];
    }
    return out;
}

std::vector<double> downsample_first(const std::vector<double>& fine, const TimeGrid& fine_grid,
                                     const TimeGrid& coarse_grid) {
    if (coarse_grid.step() % fine_grid.step() != 0)
        throw DataError("coarse step is not a multiple of fine step");
    std::vector<double> out(coarse_grid.count(), missing());
    for (int64_t k = 0; k < coarse_grid.count(); ++k) {
        int64_t j = fine_grid.index_of(coarse_grid.at(k));
        if (j >= 0) out[k] = fine[j];
    }
    return out;
}

SeriesFrame deletion_mask(const SeriesFrame& frame, const std::vector<std::string>& required) {
    for (const auto& name : required)
        if (!frame.has_column(name)) throw DataError("missing column '" + name + "'");

    SeriesFrame out = frame;
    std::vector<double> mask(frame.rows(), 1.0);
    for (const auto& name : required) {
        const auto& col = frame.column(name);
        for (int64_t k = 0; k < frame.rows(); ++k)
            if (is_missing(col[k])) mask[k] = 0.0;
    }
    out.set_column(kAvailabilityColumn, std::move(mask));
    return out;
}

}  // namespace loadcast
