#include "loadcast/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace loadcast {

int CsvTable::column_index(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(const std::string& name, const std::string& file) const {
    int idx = column_index(name);
    if (idx < 0) throw DataError(file + ": missing column '" + name + "'");
    return idx;
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_line(line);
        if (row.size() != table.header.size())
            throw DataError("'" + path + "': row " + std::to_string(table.rows.size() + 2) +
                            " has " + std::to_string(row.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

std::string format_double(double v) {
    if (is_missing(v)) return "";
    char buf[32];
    // %.17g round-trips but is noisy; try shorter forms first.
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return std::string(buf);
}

double parse_double(const std::string& s, const std::string& context) {
    if (s.empty() || s == "NA" || s == "nan" || s == "NaN") return missing();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || (end && *end != '\0'))
        throw DataError(context + ": bad number '" + s + "'");
    return v;
}

namespace {
TimeGrid grid_from_timestamps(const std::vector<int64_t>& ts, const std::string& file) {
    if (ts.size() < 2) throw DataError(file + ": need at least two rows to infer the grid");
    int64_t step = ts[1] - ts[0];
    if (step <= 0) throw DataError(file + ": timestamps are not strictly increasing");
    for (size_t i = 1; i < ts.size(); ++i)
        if (ts[i] - ts[i - 1] != step)
            throw DataError(file + ": irregular timestamp spacing at row " + std::to_string(i + 2));
    return TimeGrid(ts[0], step, static_cast<int64_t>(ts.size()));
}
}  // namespace

SeriesFrame read_series_csv(const std::string& path, const std::string& value_column) {
    CsvTable t = read_csv(path);
    int ci_ts = t.require_column("timestamp", path);
    int ci_v = t.require_column(value_column, path);
    std::vector<int64_t> ts;
    std::vector<double> vals;
    ts.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        ts.push_back(parse_timestamp(row[ci_ts]));
        vals.push_back(parse_double(row[ci_v], path));
    }
    SeriesFrame frame(grid_from_timestamps(ts, path));
    frame.add_column(value_column, std::move(vals));
    return frame;
}

SeriesFrame read_frame_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci_ts = t.require_column("timestamp", path);
    std::vector<int64_t> ts;
    ts.reserve(t.rows.size());
    for (const auto& row : t.rows) ts.push_back(parse_timestamp(row[ci_ts]));
    SeriesFrame frame(grid_from_timestamps(ts, path));
    for (size_t c = 0; c < t.header.size(); ++c) {
        if (static_cast<int>(c) == ci_ts) continue;
        std::vector<double> vals;
        vals.reserve(t.rows.size());
        for (const auto& row : t.rows) vals.push_back(parse_double(row[c], path));
        frame.add_column(t.header[c], std::move(vals));
    }
    return frame;
}

void write_series_csv(const std::string& path, const SeriesFrame& frame) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "timestamp";
    for (const auto& name : frame.column_names()) out << "," << name;
    out << "\n";
    for (int64_t k = 0; k < frame.rows(); ++k) {
        out << format_timestamp(frame.grid().at(k));
        for (const auto& name : frame.column_names())
            out << "," << format_double(frame.column(name)[k]);
        out << "\n";
    }
}

std::vector<StationSeries> read_stations_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci_id = t.require_column("station_id", path);
    int ci_lat = t.require_column("lat", path);
    int ci_lon = t.require_column("lon", path);
    int ci_ts = t.require_column("timestamp", path);
    int ci_temp = t.require_column("temp_c", path);

    struct Raw {
        double lat, lon;
        std::vector<std::pair<int64_t, double>> points;
    };
    std::map<std::string, Raw> by_station;
    for (const auto& row : t.rows) {
        Raw& r = by_station[row[ci_id]];
        r.lat = parse_double(row[ci_lat], path);
        r.lon = parse_double(row[ci_lon], path);
        r.points.emplace_back(parse_timestamp(row[ci_ts]), parse_double(row[ci_temp], path));
    }

    std::vector<StationSeries> out;
    for (auto& [id, raw] : by_station) {
        std::sort(raw.points.begin(), raw.points.end());
        std::vector<int64_t> ts;
        for (auto& p : raw.points) ts.push_back(p.first);
        StationSeries s;
        s.station_id = id;
        s.lat = raw.lat;
        s.lon = raw.lon;
        s.grid = grid_from_timestamps(ts, path + " (station " + id + ")");
        if (s.grid.step() != kStepThreeHours)
            throw DataError(path + ": station " + id + " is not 3-hourly");
        for (auto& p : raw.points) s.values.push_back(p.second);
        out.push_back(std::move(s));
    }
    return out;
}

void write_stations_csv(const std::string& path, const std::vector<StationSeries>& stations) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : stations)
        for (int64_t k = 0; k < s.grid.count(); ++k)
            rows.push_back({s.station_id, format_double(s.lat), format_double(s.lon),
                            format_timestamp(s.grid.at(k)), format_double(s.values[k])});
    write_csv(path, {"station_id", "lat", "lon", "timestamp", "temp_c"}, rows);
}

std::vector<CalendarRow> read_calendar_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci_date = t.require_column("date", path);
    int ci_dt = t.require_column("day_type", path);
    int ci_dls = t.require_column("dls", path);
    int ci_hol = t.require_column("holiday", path);
    int ci_a = t.require_column("school_holiday_a", path);
    int ci_b = t.require_column("school_holiday_b", path);
    int ci_c = t.require_column("school_holiday_c", path);
    int ci_sum = t.require_column("summer_holiday", path);

    std::vector<CalendarRow> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        CalendarRow r;
        r.day = parse_timestamp(row[ci_date]);
        r.day_type = static_cast<int>(parse_double(row[ci_dt], path));
        if (r.day_type < 1 || r.day_type > 7)
            throw DataError(path + ": day_type out of 1..7");
        r.dls = parse_double(row[ci_dls], path) != 0.0;
        r.holiday = parse_double(row[ci_hol], path) != 0.0;
        r.school_holiday_a = parse_double(row[ci_a], path) != 0.0;
        r.school_holiday_b = parse_double(row[ci_b], path) != 0.0;
        r.school_holiday_c = parse_double(row[ci_c], path) != 0.0;
        r.summer_holiday = parse_double(row[ci_sum], path) != 0.0;
        out.push_back(r);
    }
    return out;
}

void write_calendar_csv(const std::string& path, const std::vector<CalendarRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({format_date(r.day), std::to_string(r.day_type),
                       std::to_string(r.dls ? 1 : 0), std::to_string(r.holiday ? 1 : 0),
                       std::to_string(r.school_holiday_a ? 1 : 0),
                       std::to_string(r.school_holiday_b ? 1 : 0),
                       std::to_string(r.school_holiday_c ? 1 : 0),
                       std::to_string(r.summer_holiday ? 1 : 0)});
    write_csv(path,
              {"date", "day_type", "dls", "holiday", "school_holiday_a", "school_holiday_b",
               "school_holiday_c", "summer_holiday"},
              out);
}

std::vector<MobilityIndices> read_mobility_csv(const std::string& path) {
    static const std::set<std::string> kCategories = {
        "resident", "usually_present", "tourist", "excursionist", "recurrent_excursionist"};
    static const std::set<std::string> kOrigins = {"foreign", "local", "non_local"};

    CsvTable t = read_csv(path);
    int ci_date = t.require_column("date", path);
    int ci_cat = t.require_column("category", path);
    int ci_orig = t.require_column("origin", path);
    int ci_count = t.require_column("count", path);
    t.require_column("area_id", path);

    std::map<int64_t, MobilityIndices> by_day;
    for (const auto& row : t.rows) {
        const std::string& cat = row[ci_cat];
        const std::string& orig = row[ci_orig];
        if (!kCategories.count(cat)) throw DataError(path + ": unknown category '" + cat + "'");
        if (!kOrigins.count(orig)) throw DataError(path + ": unknown origin '" + orig + "'");
        int64_t day = parse_timestamp(row[ci_date]);
        double count = parse_double(row[ci_count], path);
        MobilityIndices& m = by_day[day];
        m.day = day;
        if (cat == "recurrent_excursionist") m.work += count;
        if (cat == "tourist" && (orig == "foreign" || orig == "non_local")) m.tourism += count;
        if (cat == "resident" || cat == "usually_present") m.resident += count;
    }
    std::vector<MobilityIndices> out;
    out.reserve(by_day.size());
    for (auto& [day, m] : by_day) out.push_back(m);
    return out;
}

void write_mobility_indices_csv(const std::string& path,
                                const std::vector<MobilityIndices>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({format_date(r.day), format_double(r.work), format_double(r.tourism),
                       format_double(r.resident)});
    write_csv(path, {"date", "work", "tourism", "resident"}, out);
}

std::vector<MobilityIndices> read_mobility_indices_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci_date = t.require_column("date", path);
    int ci_w = t.require_column("work", path);
    int ci_t = t.require_column("tourism", path);
    int ci_r = t.require_column("resident", path);
    std::vector<MobilityIndices> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        MobilityIndices m;
        m.day = parse_timestamp(row[ci_date]);
        m.work = parse_double(row[ci_w], path);
        m.tourism = parse_double(row[ci_t], path);
        m.resident = parse_double(row[ci_r], path);
        out.push_back(m);
    }
    return out;
}

}  // namespace loadcast
