#pragma once

#include <map>
#include <string>
#include <vector>

#include "loadcast/timegrid.hpp"

namespace loadcast {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 if absent
    int require_column(const std::string& name, const std::string& file) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);  // shortest round-trip decimal, '.' separator
double parse_double(const std::string& s, const std::string& context);

// timestamp,<value> file on a regular grid (step inferred and validated).
SeriesFrame read_series_csv(const std::string& path, const std::string& value_column);
void write_series_csv(const std::string& path, const SeriesFrame& frame);
SeriesFrame read_frame_csv(const std::string& path);  // timestamp + all columns

// station_id,lat,lon,timestamp,temp_c -> one 3-hourly series per station.
std::vector<StationSeries> read_stations_csv(const std::string& path);
void write_stations_csv(const std::string& path, const std::vector<StationSeries>& stations);

// Calendar table, one row per civil day.
struct CalendarRow {
    int64_t day = 0;  // timestamp at civil midnight
    int day_type = 1;  // 1 = Monday ... 7 = Sunday
    bool dls = false;
    bool holiday = false;
    bool school_holiday_a = false;
    bool school_holiday_b = false;
    bool school_holiday_c = false;
    bool summer_holiday = false;
};

std::vector<CalendarRow> read_calendar_csv(const std::string& path);
void write_calendar_csv(const std::string& path, const std::vector<CalendarRow>& rows);

// Daily mobility indices aggregated from the raw visitor-count file.
struct MobilityIndices {
    int64_t day = 0;
    double work = 0.0;     // sum of recurrent excursionists
    double tourism = 0.0;  // foreign + non-local tourists
    double resident = 0.0; // residents + usually present
};

// Raw file: date,area_id,category,origin,count. Categories and origins are
// validated against the fixed vocabularies; unknown labels are a data error.
std::vector<MobilityIndices> read_mobility_csv(const std::string& path);
void write_mobility_indices_csv(const std::string& path, const std::vector<MobilityIndices>& rows);
std::vector<MobilityIndices> read_mobility_indices_csv(const std::string& path);

}  // namespace loadcast
