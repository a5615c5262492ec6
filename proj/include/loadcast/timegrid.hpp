#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// Seconds. The pipeline works on three step sizes only.
inline constexpr int64_t kStepHalfHour = 1800;
inline constexpr int64_t kStepThreeHours = 10800;
inline constexpr int64_t kStepDay = 86400;
inline constexpr int64_t kHalfHoursPerDay = 48;

inline double missing() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// ---------------------------------------------------------------------------
// Civil time. Timestamps are stored as seconds since 1970-01-01 00:00 on a
// timezone-naive civil timeline (input CSV stamps are taken verbatim), so a
// day is always 48 half-hour cells. Daylight-saving is a derived flag, looked
// up from the EU civil rule, never a shift of the grid itself.
// ---------------------------------------------------------------------------

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;
};

struct CivilTime {
    CivilDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

bool is_leap_year(int year);
int year_length_days(int year);

// Days since 1970-01-01 (Howard Hinnant's algorithm).
int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(int64_t days);

// 1 = Monday ... 7 = Sunday, matching the DayType convention.
int weekday_1to7(int64_t timestamp);

int64_t timestamp_from_civil(const CivilTime& ct);
CivilTime civil_from_timestamp(int64_t t);

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" and the 'T' separator form
// (a trailing "Z" is tolerated). Throws DataError on malformed input.
int64_t parse_timestamp(const std::string& iso);
std::string format_timestamp(int64_t t);  // YYYY-MM-DDTHH:MM:SS
std::string format_date(int64_t t);       // YYYY-MM-DD

// EU summer-time rule: last Sunday of March to last Sunday of October.
bool daylight_saving_flag(int64_t timestamp);

// ---------------------------------------------------------------------------
// TimeGrid: a regular, strictly increasing timeline start + k*step.
// ---------------------------------------------------------------------------

class TimeGrid {
public:
    TimeGrid() = default;
    TimeGrid(int64_t start, int64_t step, int64_t count);

    int64_t start() const { return start_; }
    int64_t step() const { return step_; }
    int64_t count() const { return count_; }
    int64_t end() const { return start_ + step_ * count_; }  // exclusive

    int64_t at(int64_t k) const;
    // Index of an exact grid timestamp; -1 if t is off-grid.
    int64_t index_of(int64_t t) const;
    // Index of the cell containing t (floor), -1 outside [start, end).
    int64_t cell_of(int64_t t) const;

    bool operator==(const TimeGrid& o) const {
        return start_ == o.start_ && step_ == o.step_ && count_ == o.count_;
    }

private:
    int64_t start_ = 0;
    int64_t step_ = kStepHalfHour;
    int64_t count_ = 0;
};

TimeGrid build_grid(int64_t start, int64_t end, int64_t step);

// ---------------------------------------------------------------------------
// SeriesFrame: named columns on one grid. NaN encodes a missing value.
// ---------------------------------------------------------------------------

class SeriesFrame {
public:
    SeriesFrame() = default;
    explicit SeriesFrame(TimeGrid grid) : grid_(std::move(grid)) {}

    const TimeGrid& grid() const { return grid_; }
    int64_t rows() const { return grid_.count(); }

    void add_column(const std::string& name, std::vector<double> values);
    void set_column(const std::string& name, std::vector<double> values);
    bool has_column(const std::string& name) const { return cols_.count(name) != 0; }
    const std::vector<double>& column(const std::string& name) const;
    const std::vector<std::string>& column_names() const { return order_; }

private:
    TimeGrid grid_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::vector<double>> cols_;
};

// ---------------------------------------------------------------------------
// Weather stations (3-hourly temperatures) and the imputation cascade.
// ---------------------------------------------------------------------------

struct StationSeries {
    std::string station_id;
    double lat = 0.0;
    double lon = 0.0;
    TimeGrid grid;                // 3-hourly
    std::vector<double> values;  // degC, NaN = missing
};

// Mainland-France bounding box used when geo checks are enabled.
bool within_mainland_france(double lat, double lon);

double great_circle_km(double lat1, double lon1, double lat2, double lon2);

// Neighbors of `target` ordered by ascending distance, ties by station_id.
std::vector<StationSeries> order_by_distance(const StationSeries& target,
                                             const std::vector<StationSeries>& all);

struct ImputeReport {
    int64_t filled_time_mean = 0;     // rule 1: (v(t-3h)+v(t+3h))/2
    int64_t filled_neighbor = 0;      // rule 2: nearest station value
    int64_t filled_day_mean = 0;      // rule 3: (v(t-24h)+v(t+24h))/2
    std::vector<int64_t> unrecoverable;  // timestamps still missing
};

// Fills holes in `series` using, in priority order: the 3h-before/after mean,
// the nearest neighbor's value, then the day-before/after mean. Reads only
// original (pre-imputation) values, so the result does not depend on scan
// order and complete series pass through unchanged.
StationSeries impute_station(const StationSeries& series,
                             const std::vector<StationSeries>& neighbors,
                             ImputeReport* report = nullptr);

// Pointwise weighted mean across stations; weights must sum to 1 when given
// (uniform otherwise) and are renormalized over the stations available at
// each timestamp. All stations must share one grid.
std::vector<double> regional_mean_temperature(const std::vector<StationSeries>& stations,
                                              const std::vector<double>& weights = {});

// Each coarse value held constant across its interval on the target grid.
std::vector<double> upsample_hold(const std::vector<double>& coarse, const TimeGrid& coarse_grid,
                                  const TimeGrid& target);

// Inverse of upsample_hold for round-trip checks: first value per interval.
std::vector<double> downsample_first(const std::vector<double>& fine, const TimeGrid& fine_grid,
                                     const TimeGrid& coarse_grid);

inline constexpr const char* kAvailabilityColumn = "available";

// Returns a copy of `frame` with an `available` column: 1 where every
// required column is present, 0 otherwise. The input frame is not modified.
SeriesFrame deletion_mask(const SeriesFrame& frame, const std::vector<std::string>& required);

}  // namespace loadcast
