#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loadcast/csv.hpp"
#include "loadcast/timegrid.hpp"

namespace loadcast {

// Desk-scale synthetic surrogate for the open load/weather/calendar data and
// the proprietary mobility indices. All randomness is seeded; the same spec
// yields a bit-identical bundle.

struct RegimeShift {
    int64_t start = 0;
    int64_t end = 0;
    double magnitude_pct = 0.0;   // applied multiplicatively to the load core
    int64_t ramp_days = 7;        // linear on-ramp before full effect
    double work_response = 2.5;   // relative work-index drop per unit load drop
};

struct SynthSpec {
    uint64_t seed = 1;
    int64_t start = 0;   // civil midnight
    int64_t days = 730;

    // temperature process (degC)
    double temp_mean = 12.0;
    double temp_annual_amp = 8.0;
    double temp_daily_amp = 3.0;
    double temp_ar = 0.98;
    double temp_noise_sd = 0.5;

    // load components (GW)
    double base_load = 50.0;
    double annual_amp = 3.0;
    double weekend_drop = 4.0;
    double holiday_drop = 3.0;
    double daily_amp = 5.0;
    double heating_coef = 1.1;      // GW per degC below the threshold
    double heating_threshold = 15.0;
    double work_coef = 0.0;         // direct additive work-index channel
    double noise_ar = 0.7;
    double noise_sd = 0.6;
    double drift_total = 0.0;       // multiplicative ramp over the horizon

    // daily work/tourism/resident index processes
    double work_weekend_drop = 0.55;
    double work_holiday_drop = 0.45;
    double work_summer_dip = 0.25;
    double index_noise_sd = 0.02;

    std::vector<RegimeShift> shifts;
    bool mobility_gaps = true;  // indices missing March through June each year

    bool emit_stations = false;
    int n_stations = 3;
    double station_hole_rate = 0.01;
};

struct SynthBundle {
    SeriesFrame frame;  // half-hourly: load, temp
    std::vector<CalendarRow> calendar;
    std::vector<MobilityIndices> mobility;
    std::vector<StationSeries> stations;
    // Ground-truth components, half-hourly: core, regime_mult, noise,
    // work_pre (the index before regime response).
    SeriesFrame truth;
};

SynthBundle synth_generate(const SynthSpec& spec);

// Calendar table over [start, start + days) with the fixed holiday rules the
// generator uses (French-style fixed-date holidays, three school zones).
std::vector<CalendarRow> synth_calendar(int64_t start, int64_t days);

// Named presets used by the benchmark and the acceptance suite.
SynthSpec synth_preset(const std::string& name);
std::vector<std::string> synth_preset_names();

}  // namespace loadcast
