// loadcast: short-term load forecasting toolkit.
//
// Subcommands: ingest, features, fit, predict, adapt, aggregate, ensemble,
// changepoint, select, bench, synth, version. Exit codes: 0 success, 1 usage
// error, 2 data error, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "loadcast/bench.hpp"
#include "loadcast/changepoint.hpp"
#include "loadcast/config.hpp"
#include "loadcast/manifest.hpp"
#include "loadcast/plotdata.hpp"
#include "loadcast/select.hpp"
#include "loadcast/serialize.hpp"

namespace fs = std::filesystem;
using namespace loadcast;

namespace {

struct CliError {
    int code;
    std::string kind;
    std::string msg;
};

[[noreturn]] void die(int code, const std::string& kind, const std::string& msg) {
    throw CliError{code, kind, msg};
}

std::string out_path(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// Shared data loading
// ---------------------------------------------------------------------------

struct DataSet {
    SeriesFrame design;
    std::vector<CalendarRow> calendar;
    std::vector<MobilityIndices> mobility;
    std::vector<std::string> inputs;  // files read, for the manifest
};

DataSet load_dataset(const Config& cfg) {
    DataSet ds;
    std::string preset = cfg.get_string("data.synth_preset", "");
    if (!preset.empty()) {
        SynthSpec spec = synth_preset(preset);
        spec.seed = static_cast<uint64_t>(cfg.get_int("run.seed", 1));
        SynthBundle bundle = synth_generate(spec);
        ds.calendar = bundle.calendar;
        ds.mobility = bundle.mobility;
        ds.design = build_design(bundle.frame, ds.calendar, ds.mobility);
        return ds;
    }

    std::string load_path = cfg.require_string("data.load_csv");
    std::string calendar_path = cfg.require_string("data.calendar_csv");
    ds.inputs.push_back(load_path);
    ds.inputs.push_back(calendar_path);

    SeriesFrame loads = read_series_csv(load_path, "load");
    ds.calendar = read_calendar_csv(calendar_path);

    SeriesFrame base(loads.grid());
    base.add_column(col::kLoad, loads.column("load"));

    if (cfg.has("data.stations_csv")) {
        std::string stations_path = cfg.require_string("data.stations_csv");
        ds.inputs.push_back(stations_path);
        auto stations = read_stations_csv(stations_path);
        std::vector<StationSeries> imputed;
        for (const auto& st : stations)
            imputed.push_back(impute_station(st, order_by_distance(st, stations)));
        std::vector<double> national = regional_mean_temperature(imputed);
        base.add_column(col::kTemp,
                        upsample_hold(national, imputed.front().grid, loads.grid()));
    } else if (cfg.has("data.temp_csv")) {
        std::string temp_path = cfg.require_string("data.temp_csv");
        ds.inputs.push_back(temp_path);
        SeriesFrame temps = read_series_csv(temp_path, "temp");
        base.add_column(col::kTemp,
                        upsample_hold(temps.column("temp"), temps.grid(), loads.grid()));
    } else {
        throw DataError("config needs data.stations_csv or data.temp_csv");
    }

    if (cfg.has("data.mobility_csv")) {
        std::string mob_path = cfg.require_string("data.mobility_csv");
        ds.inputs.push_back(mob_path);
        // Accept either the raw visitor-count file or pre-aggregated indices.
        CsvTable probe = read_csv(mob_path);
        ds.mobility = probe.column_index("category") >= 0 ? read_mobility_csv(mob_path)
                                                          : read_mobility_indices_csv(mob_path);
    }

    ds.design = build_design(base, ds.calendar, ds.mobility);
    return ds;
}

GamFitOptions gam_options(const Config& cfg) {
    GamFitOptions opts;
    opts.gcv_passes = static_cast<int>(cfg.get_int("gam.gcv_passes", 2));
    opts.n_threads = static_cast<int>(cfg.get_int("run.threads", 0));
    opts.min_rows_per_dim = static_cast<int>(cfg.get_int("gam.min_rows_per_dim", 10));
    return opts;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_version() {
    std::cout << kVersion << "\n";
    return 0;
}

int cmd_synth(const std::string& preset, uint64_t seed, const std::string& out_dir) {
    RunManifest manifest;
    manifest.command = "synth";
    manifest.seed = seed;
    auto t0 = std::chrono::steady_clock::now();

    SynthSpec spec = synth_preset(preset);
    spec.seed = seed;
    SynthBundle bundle = synth_generate(spec);

    std::string load_path = out_path(out_dir, "load.csv");
    std::string cal_path = out_path(out_dir, "calendar.csv");
    std::string mob_path = out_path(out_dir, "mobility_indices.csv");
    std::string truth_path = out_path(out_dir, "truth.csv");
    manifest.output_paths = {load_path, cal_path, mob_path, truth_path};
    if (spec.emit_stations) manifest.output_paths.push_back(out_path(out_dir, "stations.csv"));
    Config cfg;
    cfg.set("synth.preset", preset);
    cfg.set("run.seed", std::to_string(seed));
    manifest.set_config(cfg);
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(out_dir, "manifest.json"));

    write_series_csv(load_path, bundle.frame);
    write_calendar_csv(cal_path, bundle.calendar);
    write_mobility_indices_csv(mob_path, bundle.mobility);
    write_series_csv(truth_path, bundle.truth);
    if (spec.emit_stations)
        write_stations_csv(out_path(out_dir, "stations.csv"), bundle.stations);
    std::cout << "wrote " << bundle.frame.rows() << " half-hours to " << out_dir << "\n";
    return 0;
}

int cmd_ingest(const std::string& config_path, const std::string& out_dir) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);

    RunManifest manifest;
    manifest.command = "ingest";
    manifest.set_config(cfg);
    for (const auto& p : ds.inputs) manifest.add_input(p);
    std::string frame_path = out_path(out_dir, "design.csv");
    manifest.output_paths = {frame_path};
    manifest.write(out_path(out_dir, "manifest.json"));

    write_series_csv(frame_path, ds.design);
    std::cout << "design matrix: " << ds.design.rows() << " rows, "
              << ds.design.column_names().size() << " columns -> " << frame_path << "\n";
    return 0;
}

int cmd_features_dump(const std::string& config_path, const std::string& out_file) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    write_series_csv(out_file, ds.design);
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

int cmd_fit(const std::string& config_path, const std::string& out_file) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    Formula formula = parse_formula(
        cfg.get_string("gam.formula", print_formula(full_model_formula())));
    int64_t start = cfg.require_timestamp("window.train_start");
    int64_t end = cfg.require_timestamp("window.train_end");
    GamBank bank = fit_gam_bank(ds.design, formula, start, end, gam_options(cfg));
    save_gam_bank(out_file, bank);
    double edf = 0.0;
    for (const auto& m : bank.models) edf += m.edf;
    std::cout << "fitted " << bank.models.size() << " models (total edf "
              << format_double(edf) << ") -> " << out_file << "\n";
    return 0;
}

int cmd_predict(const std::string& config_path, const std::string& bank_path,
                const std::string& out_file) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    GamBank bank = load_gam_bank(bank_path);
    GamPrediction pred = predict_gam(bank, ds.design);

    std::vector<std::vector<std::string>> rows;
    for (int64_t k = 0; k < ds.design.rows(); ++k)
        rows.push_back({format_timestamp(ds.design.grid().at(k)),
                        format_double(pred.forecast[k])});
    write_csv(out_file, {"timestamp", "forecast"}, rows);
    if (pred.n_clamped > 0)
        std::cerr << "warning: " << pred.n_clamped
                  << " spline inputs outside the training range were clamped\n";
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

int cmd_adapt(const std::string& config_path, const std::string& bank_path,
              const std::string& mode, const std::string& out_dir) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    GamBank bank = load_gam_bank(bank_path);
    GamPrediction pred = predict_gam(bank, ds.design);

    const auto& hh = ds.design.column(col::kHalfHour);
    const auto& load = ds.design.column(col::kLoad);
    const int n_chains = static_cast<int>(kStepDay / ds.design.grid().step());
    const auto n_terms = pred.normalized_effects.cols();

    std::vector<double> forecast(static_cast<size_t>(ds.design.rows()), missing());
    KalmanSnapshot snapshot;
    for (int c = 0; c < n_chains; ++c) {
        std::vector<int64_t> rows;
        for (int64_t k = 0; k < ds.design.rows(); ++k)
            if (static_cast<int>(hh[k]) == c && !is_missing(load[k]) &&
                !is_missing(pred.forecast[k]))
                rows.push_back(k);
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 1 + n_terms);
        std::vector<double> y(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            x(static_cast<Eigen::Index>(i), 0) = 1.0;
            for (Eigen::Index j = 0; j < n_terms; ++j)
                x(static_cast<Eigen::Index>(i), 1 + j) = pred.normalized_effects(rows[i], j);
            y[i] = load[rows[i]];
        }
        KalmanState init = KalmanState::initial(static_cast<int>(1 + n_terms));
        std::vector<double> chain_pred;
        NoiseConfig noise = NoiseConfig::isotropic(static_cast<int>(1 + n_terms), 0.0, 1.0);
        if (mode == "static") {
            FilterRun run = run_static(x, y, init, cfg.get_double("kalman.sigma2", 1.0));
            chain_pred = run.predictions;
            snapshot.states.push_back(run.final_state);
        } else if (mode == "dynamic") {
            int64_t burn = std::min<int64_t>(static_cast<int64_t>(rows.size()),
                                             1 + n_terms + 5);
            noise = grid_search_dynamic(x, y, burn, static_cast<int64_t>(rows.size()));
            FilterRun run = run_dynamic(x, y, init, noise);
            chain_pred = run.predictions;
            snapshot.states.push_back(run.final_state);
        } else if (mode == "viking-lite") {
            noise = NoiseConfig::isotropic(static_cast<int>(1 + n_terms),
                                           cfg.get_double("viking.q0", std::pow(2.0, -15)),
                                           cfg.get_double("viking.sigma2_0", 1.0));
            VikingRun run = run_viking(x, y, init, noise,
                                       {cfg.get_double("viking.rho_q", 0.1),
                                        cfg.get_double("viking.rho_sigma", 0.1)});
            chain_pred = run.predictions;
            snapshot.states.push_back(run.final_state);
            noise = NoiseConfig::isotropic(static_cast<int>(1 + n_terms), run.final_q,
                                           run.final_sigma2);
        } else {
            die(1, "usage", "unknown adaptation mode '" + mode + "'");
        }
        snapshot.noises.push_back(noise);
        for (size_t i = 0; i < rows.size(); ++i)
            forecast[static_cast<size_t>(rows[i])] = chain_pred[i];
    }

    std::string fc_path = out_path(out_dir, "adapt_forecast.csv");
    std::vector<std::vector<std::string>> rows_out;
    for (int64_t k = 0; k < ds.design.rows(); ++k)
        rows_out.push_back(
            {format_timestamp(ds.design.grid().at(k)), format_double(forecast[k])});
    write_csv(fc_path, {"timestamp", "forecast"}, rows_out);
    save_kalman_snapshot(out_path(out_dir, "kalman_state.bin"), snapshot);
    std::cout << "wrote " << fc_path << " and state snapshots\n";
    return 0;
}

int cmd_aggregate(const std::string& experts_csv, const std::string& target_column,
                  double bound, const std::string& out_dir) {
    SeriesFrame frame = read_frame_csv(experts_csv);
    std::vector<std::string> expert_names;
    for (const auto& name : frame.column_names())
        if (name != target_column) expert_names.push_back(name);
    if (expert_names.empty()) die(2, "data", "no expert columns in " + experts_csv);

    const auto& target = frame.column(target_column);
    std::vector<std::vector<double>> experts(static_cast<size_t>(frame.rows()));
    std::vector<double> targets;
    for (int64_t k = 0; k < frame.rows(); ++k) {
        for (const auto& name : expert_names) experts[k].push_back(frame.column(name)[k]);
        if (is_missing(target[k])) die(2, "data", "missing target at row " + std::to_string(k));
        targets.push_back(target[k]);
    }

    ExpertPool pool(expert_names, bound);
    AggregateRun run = aggregate_run(pool, experts, targets);

    std::vector<std::vector<std::string>> fc_rows, w_rows;
    for (int64_t k = 0; k < frame.rows(); ++k) {
        fc_rows.push_back(
            {format_timestamp(frame.grid().at(k)), format_double(run.forecast[k])});
        std::vector<std::string> w{format_timestamp(frame.grid().at(k))};
        for (size_t e = 0; e < expert_names.size(); ++e)
            w.push_back(format_double(run.weights[k][e]));
        w_rows.push_back(std::move(w));
    }
    std::vector<std::string> w_header{"timestamp"};
    for (const auto& n : expert_names) w_header.push_back(n);
    write_csv(out_path(out_dir, "aggregate.csv"), {"timestamp", "forecast"}, fc_rows);
    write_csv(out_path(out_dir, "weights.csv"), w_header, w_rows);
    std::cout << "aggregated " << expert_names.size() << " experts over " << frame.rows()
              << " steps\n";
    return 0;
}

int cmd_ensemble(const std::string& config_path, const std::string& model,
                 const std::string& out_file) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    int64_t start = cfg.require_timestamp("window.train_start");
    int64_t end = cfg.require_timestamp("window.train_end");
    uint64_t seed = static_cast<uint64_t>(cfg.get_int("run.seed", 1));

    if (model == "rf" || model == "rf-block") {
        ForestConfig fc;
        fc.n_trees = static_cast<int>(cfg.get_int("rf.trees", 1000));
        fc.max_depth = static_cast<int>(cfg.get_int("rf.depth", 6));
        fc.block_len = cfg.get_int("rf.block_len", 48);
        fc.bootstrap = model == "rf-block" ? BootstrapKind::Block : BootstrapKind::Iid;

        std::vector<std::string> features{col::kHalfHour, col::kDayType, col::kToY,
                                          col::kTemp,     col::kTemp95,  col::kLoad1D,
                                          col::kLoad1W};
        std::vector<const std::vector<double>*> cols;
        for (const auto& f : features) cols.push_back(&ds.design.column(f));
        const auto& load = ds.design.column(col::kLoad);
        std::vector<int64_t> rows;
        for (int64_t k = 0; k < ds.design.rows(); ++k) {
            int64_t t = ds.design.grid().at(k);
            if (t < start || t >= end || is_missing(load[k])) continue;
            bool ok = true;
            for (const auto* c : cols)
                if (is_missing((*c)[k])) ok = false;
            if (ok) rows.push_back(k);
        }
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(cols.size()));
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (size_t i = 0; i < rows.size(); ++i) {
            for (size_t j = 0; j < cols.size(); ++j)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    (*cols[j])[rows[i]];
            y[static_cast<Eigen::Index>(i)] = load[rows[i]];
        }
        Forest forest = fit_forest(x, y, fc, seed);
        save_forest(out_file, forest);
        std::cout << "fitted " << fc.n_trees << " trees on " << rows.size() << " rows -> "
                  << out_file << "\n";
        return 0;
    }
    if (model == "gamboost") {
        Formula formula = parse_formula(
            cfg.get_string("gam.formula", print_formula(full_model_formula())));
        GamBoostOptions bo;
        bo.steps = static_cast<int>(cfg.get_int("boost.steps", 500));
        bo.shrinkage = cfg.get_double("boost.shrinkage", 0.1);
        int hh = static_cast<int>(cfg.get_int("boost.half_hour", 20));
        auto rows = eligible_rows(ds.design, formula, start, end, hh);
        GamBoostModel m = fit_gam_boost(ds.design, formula.terms, formula.response, rows, bo);
        save_gam_boost(out_file, m);
        std::cout << "boosted " << m.selection_path.size() << " steps -> " << out_file << "\n";
        return 0;
    }
    die(1, "usage", "unknown ensemble model '" + model + "'");
}

int cmd_changepoint(const std::string& residuals_csv, int max_cp, int64_t min_seg, double kappa,
                    const std::string& out_dir) {
    SeriesFrame frame = read_series_csv(residuals_csv, "residual");
    const auto& res = frame.column("residual");
    std::vector<double> series;
    for (double v : res)
        if (!is_missing(v)) series.push_back(v);
    if (series.size() != res.size()) die(2, "data", "residual series has missing values");

    ChangePointReport report = binseg(series, max_cp, min_seg);
    ResidualDiagnostics diag = residual_diagnostics(series);
    ChangePointReport kept = significance_filter(report, diag.sd, kappa);

    std::vector<std::vector<std::string>> rows;
    for (const auto& p : kept.points)
        rows.push_back({std::to_string(p.rank), format_timestamp(frame.grid().at(p.index)),
                        std::to_string(p.index), format_double(p.cost_reduction),
                        format_double(p.left_mean), format_double(p.right_mean)});
    write_csv(out_path(out_dir, "changepoints.csv"),
              {"rank", "timestamp", "index", "cost_reduction", "left_mean", "right_mean"}, rows);

    std::vector<double> seg = segment_means(series, kept.sorted_indices());
    std::vector<double> roll = rolling_average(series, frame.grid());
    PlotSeries s_res{"residuals", {}, {}}, s_seg{"segment-mean", {}, {}},
        s_roll{"rolling-15d", {}, {}};
    for (int64_t k = 0; k < frame.rows(); ++k) {
        int64_t t = frame.grid().at(k);
        s_res.timestamps.push_back(t);
        s_res.values.push_back(series[k]);
        s_seg.timestamps.push_back(t);
        s_seg.values.push_back(seg[k]);
        s_roll.timestamps.push_back(t);
        s_roll.values.push_back(roll[k]);
    }
    write_plot_csv(out_path(out_dir, "residuals_segments.csv"), {s_res, s_seg, s_roll});
    write_plot_svg(out_path(out_dir, "residuals_segments.svg"), {s_res, s_seg, s_roll},
                   "residuals with segment means");

    std::vector<std::vector<std::string>> drows{
        {"mean", format_double(diag.mean)},
        {"sd", format_double(diag.sd)},
        {"skew", format_double(diag.skew)},
        {"kurtosis_excess", format_double(diag.kurtosis)},
        {"t_stat", format_double(diag.t_stat)},
        {"ljung_box", format_double(diag.ljung_box)},
        {"ljung_box_lags", std::to_string(diag.ljung_box_lags)}};
    write_csv(out_path(out_dir, "diagnostics.csv"), {"stat", "value"}, drows);
    std::cout << kept.points.size() << " change points retained of " << report.points.size()
              << " found\n";
    return 0;
}

int cmd_select(const std::string& config_path, const std::string& out_file) {
    Config cfg = Config::from_file(config_path);
    DataSet ds = load_dataset(cfg);
    int hh = static_cast<int>(cfg.get_int("select.half_hour", 20));
    int64_t start = cfg.get_timestamp("select.start", ds.design.grid().start());
    int64_t end = cfg.get_timestamp("select.end", ds.design.grid().end());

    // Daily observations at one half-hour, deletion framework over mobility.
    std::vector<std::string> names{col::kTemp95, col::kWork,  col::kResident, col::kTourism,
                                   col::kToY,    col::kDayType, col::kHoliday};
    std::vector<const std::vector<double>*> cols;
    for (const auto& n : names) cols.push_back(&ds.design.column(n));
    const auto& load = ds.design.column(col::kLoad);
    const auto& hhcol = ds.design.column(col::kHalfHour);

    std::vector<std::vector<double>> features(names.size());
    std::vector<double> target;
    for (int64_t k = 0; k < ds.design.rows(); ++k) {
        int64_t t = ds.design.grid().at(k);
        if (t < start || t >= end || static_cast<int>(hhcol[k]) != hh) continue;
        if (is_missing(load[k])) continue;
        bool ok = true;
        for (const auto* c : cols)
            if (is_missing((*c)[k])) ok = false;
        if (!ok) continue;
        for (size_t j = 0; j < cols.size(); ++j) features[j].push_back((*cols[j])[k]);
        target.push_back(load[k]);
    }
    if (target.size() < 100) die(2, "data", "not enough complete daily rows for selection");

    uint64_t seed = static_cast<uint64_t>(cfg.get_int("run.seed", 1));
    int permutations = static_cast<int>(cfg.get_int("select.permutations", 64));
    int shap_trees = static_cast<int>(cfg.get_int("select.shapley_trees", 200));

    ModelFitter forest_fitter = [&](const Eigen::MatrixXd& x,
                                    const std::vector<double>& y) -> std::vector<double> {
        ForestConfig fc;
        fc.n_trees = shap_trees;
        fc.max_depth = 6;
        Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
        for (size_t i = 0; i < y.size(); ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
        Forest f = fit_forest(x, yv, fc, seed);
        return f.predict_rows(x);
    };

    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::vector<std::string>>> corrections = {
        {"load", {}},
        {"load \\ (temp95)", {col::kTemp95}},
        {"load \\ (temp95,work)", {col::kTemp95, col::kWork}}};
    for (const auto& [label, removed] : corrections) {
        std::vector<double> corrected = correct_for(features, names, target, removed);
        RankingReport m = mrmr_rank(features, names, corrected,
                                    static_cast<int>(names.size()));
        RankingReport hd = hoeffding_rank(features, names, corrected);
        std::mt19937_64 rng(seed);
        RankingReport sh =
            shapley_importance(forest_fitter, features, names, corrected, permutations, rng);
        for (const auto& r : m.ranking)
            rows.push_back({label, "mrmr", r.name, format_double(r.score), ""});
        for (const auto& r : hd.ranking)
            rows.push_back({label, "hoeffding", r.name, format_double(r.score), ""});
        for (const auto& r : sh.ranking)
            rows.push_back(
                {label, "shapley", r.name, format_double(r.score), format_double(r.std_error)});
    }
    write_csv(out_file, {"target", "method", "feature", "score", "std_error"}, rows);
    std::cout << "wrote " << out_file << " (" << target.size() << " daily rows)\n";
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir) {
    Config cfg = Config::from_file(config_path);
    auto t0 = std::chrono::steady_clock::now();
    DataSet ds = load_dataset(cfg);

    BenchOptions opts;
    opts.train_start = cfg.require_timestamp("window.train_start");
    opts.train_end = cfg.require_timestamp("window.train_end");
    opts.test_start = cfg.require_timestamp("window.test_start");
    opts.test_end = cfg.require_timestamp("window.test_end");
    opts.exclude_holidays = cfg.get_bool("bench.exclude_holidays", false);
    opts.with_mobility = cfg.get_bool("bench.with_mobility", true);
    opts.seed = static_cast<uint64_t>(cfg.get_int("run.seed", 1));
    opts.bootstrap_reps = static_cast<int>(cfg.get_int("bench.bootstrap_reps", 1000));
    opts.block_len = cfg.get_int("bench.block_len", 48);
    opts.bound_b = cfg.get_double("aggregate.bound_b", 100.0);
    opts.formula =
        parse_formula(cfg.get_string("gam.formula", print_formula(full_model_formula())));
    opts.gam = gam_options(cfg);
    opts.forest.n_trees = static_cast<int>(cfg.get_int("rf.trees", 1000));
    opts.forest.max_depth = static_cast<int>(cfg.get_int("rf.depth", 6));
    opts.forest.block_len = cfg.get_int("rf.block_len", 48);
    opts.boost.steps = static_cast<int>(cfg.get_int("boost.steps", 500));
    opts.boost.shrinkage = cfg.get_double("boost.shrinkage", 0.1);
    std::string models = cfg.get_string("bench.models", "");
    if (!models.empty()) {
        std::string cur;
        for (char c : models + ",") {
            if (c == ',') {
                if (!cur.empty()) opts.models.push_back(cur);
                cur.clear();
            } else if (c != ' ') {
                cur.push_back(c);
            }
        }
    }

    RunManifest manifest;
    manifest.command = "bench";
    manifest.seed = opts.seed;
    manifest.set_config(cfg);
    for (const auto& p : ds.inputs) manifest.add_input(p);
    std::string scores_path = out_path(out_dir, "scores.csv");
    std::string weights_path = out_path(out_dir, "weights.csv");
    std::string report_path = out_path(out_dir, "report.md");
    manifest.output_paths = {scores_path, weights_path, report_path};
    manifest.write(out_path(out_dir, "manifest.json"));

    BenchResult result = run_benchmark(ds.design, opts);

    std::vector<std::vector<std::string>> srows;
    for (const auto& s : result.scores)
        srows.push_back({s.model, s.variant, s.window,
                         s.failed ? "" : format_double(s.rmse_gw),
                         s.failed ? "" : format_double(s.ci_rmse),
                         s.failed ? "" : format_double(s.mape_pct),
                         s.failed ? "" : format_double(s.ci_mape),
                         std::to_string(s.n_points), s.failed ? "failed" : "ok", s.note});
    write_csv(scores_path,
              {"model", "variant", "window", "rmse_gw", "ci_rmse", "mape_pct", "ci_mape",
               "n_points", "status", "note"},
              srows);

    std::vector<std::vector<std::string>> wrows;
    for (const auto& w : result.weight_history)
        wrows.push_back({format_timestamp(w.timestamp), w.expert, format_double(w.weight)});
    write_csv(weights_path, {"timestamp", "expert", "weight"}, wrows);

    std::ofstream report(report_path);
    report << "# Benchmark report\n\n";
    report << "| model | variant | RMSE (GW) | MAPE (%) |\n|---|---|---|---|\n";
    for (const auto& s : result.scores) {
        if (s.failed)
            report << "| " << s.model << " | " << s.variant << " | " << s.note << " | |\n";
        else
            report << "| " << s.model << " | " << s.variant << " | " << format_double(s.rmse_gw)
                   << " +- " << format_double(s.ci_rmse) << " | " << format_double(s.mape_pct)
                   << " +- " << format_double(s.ci_mape) << " |\n";
    }
    report << "\n";
    for (const auto& e : result.events) report << "- " << e << "\n";

    // Refresh the manifest with the true wall clock.
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(out_dir, "manifest.json"));

    for (const auto& s : result.scores)
        if (!s.failed)
            std::cout << s.model << " (" << s.variant << "): rmse " << format_double(s.rmse_gw)
                      << " mape " << format_double(s.mape_pct) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loadcast: short-term electricity load forecasting toolkit"};
    app.require_subcommand(1);

    auto* v = app.add_subcommand("version", "print the artifact version");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_preset_name = "reference", synth_out = "out";
    uint64_t synth_seed = 1;
    synth->add_option("--preset", synth_preset_name, "preset name");
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--out", synth_out, "output directory");

    auto* ingest = app.add_subcommand("ingest", "read raw CSVs and build the aligned dataset");
    std::string ingest_cfg, ingest_out = "out";
    ingest->add_option("--config", ingest_cfg)->required();
    ingest->add_option("--out", ingest_out);

    auto* features = app.add_subcommand("features", "feature engineering");
    auto* features_dump = features->add_subcommand("dump", "write the design matrix as CSV");
    std::string feat_cfg, feat_out = "design.csv";
    features_dump->add_option("--config", feat_cfg)->required();
    features_dump->add_option("--out", feat_out);

    auto* fit = app.add_subcommand("fit", "fit the per-half-hour GAM bank");
    std::string fit_cfg, fit_out = "bank.bin";
    fit->add_option("--config", fit_cfg)->required();
    fit->add_option("--out", fit_out);

    auto* predict = app.add_subcommand("predict", "predict from a serialized bank");
    std::string pred_cfg, pred_bank, pred_out = "forecast.csv";
    predict->add_option("--config", pred_cfg)->required();
    predict->add_option("--bank", pred_bank)->required();
    predict->add_option("--out", pred_out);

    auto* adapt = app.add_subcommand("adapt", "state-space adaptation of a GAM bank");
    std::string adapt_cfg, adapt_bank, adapt_mode = "dynamic", adapt_out = "out";
    adapt->add_option("--config", adapt_cfg)->required();
    adapt->add_option("--bank", adapt_bank)->required();
    adapt->add_option("--mode", adapt_mode, "static|dynamic|viking-lite");
    adapt->add_option("--out", adapt_out);

    auto* aggregate = app.add_subcommand("aggregate", "ML-Poly aggregation of expert forecasts");
    std::string agg_experts, agg_target = "load", agg_out = "out";
    double agg_bound = 100.0;
    aggregate->add_option("--experts", agg_experts, "CSV of expert forecast columns")->required();
    aggregate->add_option("--target", agg_target, "target column name");
    aggregate->add_option("--bound", agg_bound, "load bound B in GW");
    aggregate->add_option("--out", agg_out);

    auto* ensemble = app.add_subcommand("ensemble", "fit a forest or boosting model");
    std::string ens_cfg, ens_model = "rf", ens_out = "model.bin";
    ensemble->add_option("--config", ens_cfg)->required();
    ensemble->add_option("--model", ens_model, "rf|rf-block|gamboost");
    ensemble->add_option("--out", ens_out);

    auto* changepoint = app.add_subcommand("changepoint", "binary segmentation of residuals");
    std::string cp_csv, cp_out = "out";
    int cp_max = 10;
    int64_t cp_min_seg = 48;
    double cp_kappa = 0.25;
    changepoint->add_option("--residuals", cp_csv, "CSV with timestamp,residual")->required();
    changepoint->add_option("--max-cp", cp_max);
    changepoint->add_option("--min-seg", cp_min_seg);
    changepoint->add_option("--kappa", cp_kappa);
    changepoint->add_option("--out", cp_out);

    auto* select = app.add_subcommand("select", "variable ranking (mRMR, Hoeffding, Shapley)");
    std::string sel_cfg, sel_out = "ranking.csv";
    select->add_option("--config", sel_cfg)->required();
    select->add_option("--out", sel_out);

    auto* bench = app.add_subcommand("bench", "run the full benchmark");
    std::string bench_cfg, bench_out = "out";
    bench->add_option("--config", bench_cfg)->required();
    bench->add_option("--out", bench_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << "error code=1 kind=usage msg=\"" << e.what() << "\"\n";
        std::cerr << app.help() << "\n";
        return 1;
    }

    try {
        if (*v) return cmd_version();
        if (*synth) return cmd_synth(synth_preset_name, synth_seed, synth_out);
        if (*ingest) return cmd_ingest(ingest_cfg, ingest_out);
        if (*features_dump) return cmd_features_dump(feat_cfg, feat_out);
        if (*features) {
            std::cerr << "error code=1 kind=usage msg=\"features requires a subcommand\"\n";
            return 1;
        }
        if (*fit) return cmd_fit(fit_cfg, fit_out);
        if (*predict) return cmd_predict(pred_cfg, pred_bank, pred_out);
        if (*adapt) return cmd_adapt(adapt_cfg, adapt_bank, adapt_mode, adapt_out);
        if (*aggregate) return cmd_aggregate(agg_experts, agg_target, agg_bound, agg_out);
        if (*ensemble) return cmd_ensemble(ens_cfg, ens_model, ens_out);
        if (*changepoint)
            return cmd_changepoint(cp_csv, cp_max, cp_min_seg, cp_kappa, cp_out);
        if (*select) return cmd_select(sel_cfg, sel_out);
        if (*bench) return cmd_bench(bench_cfg, bench_out);
    } catch (const CliError& e) {
        std::cerr << "error code=" << e.code << " kind=" << e.kind << " msg=\"" << e.msg
                  << "\"\n";
        return e.code;
    } catch (const UsageError& e) {
        std::cerr << "error code=1 kind=usage msg=\"" << e.what() << "\"\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error code=2 kind=data msg=\"" << e.what() << "\"\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error code=3 kind=numeric msg=\"" << e.what() << "\"\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error code=3 kind=numeric msg=\"" << e.what() << "\"\n";
        return 3;
    }
    return 0;
}
