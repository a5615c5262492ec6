#include "loadcast/synth.hpp"

#include <cmath>
#include <random>

#include "loadcast/features.hpp"

namespace loadcast {

namespace {

constexpr double kTau = 6.283185307179586;

bool date_in(const CivilDate& d, int m1, int d1, int m2, int d2) {
    int v = d.month * 100 + d.day;
    int lo = m1 * 100 + d1;
    int hi = m2 * 100 + d2;
    if (lo <= hi) return v >= lo && v <= hi;
    return v >= lo || v <= hi;  // wraps over new year
}

bool fixed_holiday(const CivilDate& d) {
    static const int dates[] = {101, 501, 508, 714, 815, 1101, 1111, 1225};
    int v = d.month * 100 + d.day;
    for (int x : dates)
        if (v == x) return true;
    return false;
}

}  // namespace

std::vector<CalendarRow> synth_calendar(int64_t start, int64_t days) {
    std::vector<CalendarRow> out;
    out.reserve(static_cast<size_t>(days));
    for (int64_t d = 0; d < days; ++d) {
        int64_t t = start + d * kStepDay;
        CivilDate date = civil_from_timestamp(t).date;
        CalendarRow row;
        row.day = t;
        row.day_type = weekday_1to7(t);
        row.dls = daylight_saving_flag(t);
        row.holiday = fixed_holiday(date);
        // Staggered winter/spring breaks per zone; shared summer, autumn and
        // Christmas breaks.
        bool common = date_in(date, 7, 8, 8, 31) || date_in(date, 10, 20, 11, 2) ||
                      date_in(date, 12, 19, 1, 3);
        row.school_holiday_a = common || date_in(date, 2, 8, 2, 21) || date_in(date, 4, 10, 4, 24);
        row.school_holiday_b = common || date_in(date, 2, 15, 2, 28) || date_in(date, 4, 17, 5, 1);
        row.school_holiday_c = common || date_in(date, 2, 1, 2, 14) || date_in(date, 4, 3, 4, 17);
        row.summer_holiday = date_in(date, 7, 1, 8, 31);
        out.push_back(row);
    }
    return out;
}

SynthBundle synth_generate(const SynthSpec& spec) {
    if (spec.days < 8) throw DataError("synthetic horizon must cover at least 8 days");
    for (const auto& s : spec.shifts) {
        if (std::abs(s.magnitude_pct) >= 50.0)
            throw DataError("regime magnitude must lie in (-50, 50) percent");
        for (const auto& o : spec.shifts)
            if (&s != &o && s.start < o.end && o.start < s.end)
                throw DataError("regime shifts must not overlap");
    }

    const TimeGrid grid(spec.start, kStepHalfHour, spec.days * kHalfHoursPerDay);
    const int64_t n = grid.count();

    SynthBundle bundle;
    bundle.calendar = synth_calendar(spec.start, spec.days);

    // Regime multiplier per day (nights included), ramping in before `start`.
    std::vector<double> regime_day(static_cast<size_t>(spec.days), 1.0);
    for (int64_t d = 0; d < spec.days; ++d) {
        int64_t t = spec.start + d * kStepDay;
        for (const auto& s : spec.shifts) {
            double mag = s.magnitude_pct / 100.0;
            if (t >= s.start && t < s.end) {
                regime_day[d] = 1.0 + mag;
            } else if (s.ramp_days > 0 && t >= s.start - s.ramp_days * kStepDay && t < s.start) {
                double frac = static_cast<double>(t - (s.start - s.ramp_days * kStepDay)) /
                              static_cast<double>(s.ramp_days * kStepDay);
                regime_day[d] = 1.0 + mag * frac;
            }
        }
    }

    // Daily mobility indices.
    std::mt19937_64 rng_idx(mix_seed(spec.seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> work_pre(static_cast<size_t>(spec.days));
    bundle.mobility.reserve(static_cast<size_t>(spec.days));
    for (int64_t d = 0; d < spec.days; ++d) {
        const CalendarRow& cal = bundle.calendar[static_cast<size_t>(d)];
        bool weekend = cal.day_type >= 6;
        double summer = cal.summer_holiday ? 1.0 : (cal.school_holiday_a ? 0.5 : 0.0);
        double w = 1.0;
        if (weekend) w -= spec.work_weekend_drop;
        if (cal.holiday) w -= spec.work_holiday_drop;
        w -= spec.work_summer_dip * summer;
        w += spec.index_noise_sd * gauss(rng_idx);
        work_pre[static_cast<size_t>(d)] = std::max(w, 0.02);

        MobilityIndices m;
        m.day = cal.day;
        double shift_gain = 1.0;
        for (const auto& s : spec.shifts)
            if (cal.day >= s.start - s.ramp_days * kStepDay && cal.day < s.end)
                shift_gain = 1.0 + s.work_response * (regime_day[static_cast<size_t>(d)] - 1.0);
        m.work = std::max(work_pre[static_cast<size_t>(d)] * shift_gain, 0.02);
        m.tourism = std::max(
            0.5 + 0.8 * summer + 0.25 * (cal.school_holiday_a ? 1.0 : 0.0) + 0.2 * weekend +
                spec.index_noise_sd * gauss(rng_idx),
            0.02);
        m.resident = std::max(1.2 - 0.3 * summer - 0.1 * weekend +
                                  spec.index_noise_sd * gauss(rng_idx),
                              0.02);
        bundle.mobility.push_back(m);
    }
    if (spec.mobility_gaps) {
        std::vector<MobilityIndices> kept;
        for (const auto& m : bundle.mobility) {
            int month = civil_from_timestamp(m.day).date.month;
            if (month >= 3 && month <= 6) continue;  // missing March through June
            kept.push_back(m);
        }
        bundle.mobility = std::move(kept);
    }

    // Temperature, half-hourly.
    std::mt19937_64 rng_temp(mix_seed(spec.seed, 2));
    std::vector<double> temp(static_cast<size_t>(n));
    double temp_ar_state = 0.0;
    for (int64_t k = 0; k < n; ++k) {
        int64_t t = grid.at(k);
        double toy = time_of_year(t);
        double hh = static_cast<double>((t % kStepDay) / kStepHalfHour);
        temp_ar_state = spec.temp_ar * temp_ar_state + spec.temp_noise_sd * gauss(rng_temp);
        temp[static_cast<size_t>(k)] = spec.temp_mean - spec.temp_annual_amp * std::cos(kTau * toy) -
                                       spec.temp_daily_amp * std::cos(kTau * (hh - 28.0) / 48.0) +
                                       temp_ar_state;
    }
    std::vector<double> temp_s = exp_smooth(temp, 0.95);

    // Load.
    std::mt19937_64 rng_load(mix_seed(spec.seed, 3));
    std::vector<double> load(static_cast<size_t>(n)), core(static_cast<size_t>(n)),
        mult(static_cast<size_t>(n)), noise(static_cast<size_t>(n)),
        work_pre_hh(static_cast<size_t>(n));
    double noise_state = 0.0;
    const double horizon = static_cast<double>(spec.days * kStepDay);
    for (int64_t k = 0; k < n; ++k) {
        int64_t t = grid.at(k);
        auto d = static_cast<size_t>((t - spec.start) / kStepDay);
        const CalendarRow& cal = bundle.calendar[d];
        double toy = time_of_year(t);
        double hh = static_cast<double>((t % kStepDay) / kStepHalfHour);

        double profile = 0.7 * std::sin(kTau * (hh - 8.0) / 48.0) +
                         0.3 * std::sin(2.0 * kTau * (hh - 2.0) / 48.0);
        double c = spec.base_load + spec.annual_amp * std::cos(kTau * toy) +
                   spec.daily_amp * profile;
        if (cal.day_type >= 6) c -= spec.weekend_drop;
        if (cal.holiday) c -= spec.holiday_drop;
        c += spec.heating_coef * std::max(0.0, spec.heating_threshold - temp_s[static_cast<size_t>(k)]);
        double day_shape = (hh >= 12 && hh <= 40) ? 1.0 : 0.3;  // 6:00 to 20:00
        c += spec.work_coef * (work_pre[d] - 1.0) * day_shape;

        double m = regime_day[d] * (1.0 + spec.drift_total *
                                              static_cast<double>(t - spec.start) / horizon);
        noise_state = spec.noise_ar * noise_state + spec.noise_sd * gauss(rng_load);

        core[static_cast<size_t>(k)] = c;
        mult[static_cast<size_t>(k)] = m;
        noise[static_cast<size_t>(k)] = noise_state;
        work_pre_hh[static_cast<size_t>(k)] = work_pre[d];
        load[static_cast<size_t>(k)] = c * m + noise_state;
    }

    bundle.frame = SeriesFrame(grid);
    bundle.frame.add_column(col::kLoad, std::move(load));
    bundle.frame.add_column(col::kTemp, temp);

    bundle.truth = SeriesFrame(grid);
    bundle.truth.add_column("core", std::move(core));
    bundle.truth.add_column("regime_mult", std::move(mult));
    bundle.truth.add_column("noise", std::move(noise));
    bundle.truth.add_column("work_pre", std::move(work_pre_hh));

    if (spec.emit_stations) {
        std::mt19937_64 rng_st(mix_seed(spec.seed, 4));
        TimeGrid sgrid(spec.start, kStepThreeHours, spec.days * (kStepDay / kStepThreeHours));
        std::uniform_real_distribution<double> ulat(43.0, 50.0), ulon(-3.0, 7.0),
            uhole(0.0, 1.0);
        for (int s = 0; s < spec.n_stations; ++s) {
            StationSeries st;
            st.station_id = "S" + std::to_string(100 + s);
            st.lat = ulat(rng_st);
            st.lon = ulon(rng_st);
            st.grid = sgrid;
            double offset = 0.8 * (s - 0.5 * (spec.n_stations - 1));
            for (int64_t k = 0; k < sgrid.count(); ++k) {
                int64_t idx = grid.index_of(sgrid.at(k));
                double v = temp[static_cast<size_t>(idx)] + offset + 0.3 * gauss(rng_st);
                st.values.push_back(uhole(rng_st) < spec.station_hole_rate ? missing() : v);
            }
            bundle.stations.push_back(std::move(st));
        }
    }
    return bundle;
}

SynthSpec synth_preset(const std::string& name) {
    SynthSpec spec;
    auto day_count = [](const char* a, const char* b) {
        return (parse_timestamp(b) - parse_timestamp(a)) / kStepDay;
    };
    if (name == "reference") {
        // Paper-shaped timeline: long open-data history, a lockdown-like dip
        // and a sobriety-like regime, mobility available July through
        // February only.
        spec.start = parse_timestamp("2014-01-01");
        spec.days = day_count("2014-01-01", "2023-03-01");
        spec.shifts = {{parse_timestamp("2020-03-15"), parse_timestamp("2020-05-11"), -15.0, 7, 2.5},
                       {parse_timestamp("2022-10-10"), parse_timestamp("2023-03-01"), -10.6, 35, 2.5}};
        spec.mobility_gaps = true;
    } else if (name == "drift") {
        spec.start = parse_timestamp("2019-01-01");
        spec.days = 730;
        spec.drift_total = 0.10;
        spec.shifts = {};
        spec.mobility_gaps = false;
    } else if (name == "selection") {
        spec.start = parse_timestamp("2019-07-01");
        spec.days = day_count("2019-07-01", "2022-03-01");
        spec.work_coef = 3.0;
        spec.shifts = {{parse_timestamp("2020-03-15"), parse_timestamp("2020-05-11"), -15.0, 7, 2.5},
                       {parse_timestamp("2021-11-01"), parse_timestamp("2022-02-01"), -8.0, 14, 2.5}};
        spec.mobility_gaps = true;
    } else if (name == "demo") {
        spec.start = parse_timestamp("2019-01-01");
        spec.days = 120;
        spec.emit_stations = true;
        spec.mobility_gaps = false;
    } else {
        throw DataError("unknown synthetic preset '" + name + "'");
    }
    return spec;
}

std::vector<std::string> synth_preset_names() { return {"reference", "drift", "selection", "demo"}; }

}  // namespace loadcast
