#include "loadcast/bench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace loadcast {

StackedRun residual_stack(const std::vector<double>& base_forecast,
                          const std::vector<double>& residual_forecast) {
    if (base_forecast.size() != residual_forecast.size())
        throw DataError("stack: length mismatch");
    StackedRun out;
    out.forecast = base_forecast;
    out.used_residual.assign(base_forecast.size(), false);
    for (size_t i = 0; i < base_forecast.size(); ++i) {
        if (is_missing(base_forecast[i]) || is_missing(residual_forecast[i])) continue;
        out.forecast[i] += residual_forecast[i];
        out.used_residual[i] = true;
    }
    return out;
}

StackedRun stack_with_residual_gam(const SeriesFrame& design,
                                   const std::vector<double>& base_forecast,
                                   int64_t train_start, int64_t train_end,
                                   const Formula& residual_formula, const GamFitOptions& opts) {
    SeriesFrame aug = design;
    const auto& load = design.column(col::kLoad);
    std::vector<double> err(static_cast<size_t>(design.rows()), missing());
    for (int64_t k = 0; k < design.rows(); ++k)
        if (!is_missing(load[k]) && !is_missing(base_forecast[k]))
            err[static_cast<size_t>(k)] = load[k] - base_forecast[k];
    aug.set_column(residual_formula.response, std::move(err));

    int64_t overlap = 0;
    const int64_t steps_per_day = kStepDay / design.grid().step();
    for (int h = 0; h < steps_per_day; ++h)
        overlap += static_cast<int64_t>(
            eligible_rows(aug, residual_formula, train_start, train_end, h).size());
    if (overlap == 0) throw DataError("no mobility rows overlap the training window");

    GamBank resid_bank = fit_gam_bank(aug, residual_formula, train_start, train_end, opts);
    GamPrediction resid_pred = predict_gam(resid_bank, aug);
    return residual_stack(base_forecast, resid_pred.forecast);
}

std::vector<bool> holiday_exclusion_mask(const SeriesFrame& design) {
    const auto& holiday = design.column(col::kHoliday);
    const TimeGrid& grid = design.grid();
    std::set<int64_t> holiday_days;
    for (int64_t k = 0; k < grid.count(); ++k)
        if (!is_missing(holiday[k]) && holiday[k] != 0.0)
            holiday_days.insert(grid.at(k) / kStepDay);

    std::vector<bool> mask(static_cast<size_t>(grid.count()), false);
    for (int64_t k = 0; k < grid.count(); ++k) {
        int64_t day = grid.at(k) / kStepDay;
        if (holiday_days.count(day) || holiday_days.count(day - 1) || holiday_days.count(day + 1))
            mask[static_cast<size_t>(k)] = true;
    }
    return mask;
}

std::vector<std::string> benchmark_model_names() {
    return {"persistence", "gam",         "static-kalman", "dynamic-kalman", "viking-lite",
            "aggregation", "gam-boosting", "rf",            "rf-block"};
}

namespace {

constexpr const char* kVariantBase = "without-mobility";
constexpr const char* kVariantMobility = "with-mobility";

struct Harness {
    const SeriesFrame& design;
    const BenchOptions& opts;
    SeriesFrame fit_design;  // load masked on excluded days
    std::vector<bool> excluded;
    const std::vector<double>* load = nullptr;
    BenchResult result;
    bool wants_all = true;

    Harness(const SeriesFrame& d, const BenchOptions& o) : design(d), opts(o), fit_design(d) {
        excluded.assign(static_cast<size_t>(d.rows()), false);
        if (opts.exclude_holidays) {
            excluded = holiday_exclusion_mask(d);
            std::vector<double> masked = d.column(col::kLoad);
            for (int64_t k = 0; k < d.rows(); ++k)
                if (excluded[static_cast<size_t>(k)]) masked[static_cast<size_t>(k)] = missing();
            fit_design.set_column(col::kLoad, std::move(masked));
        }
        load = &design.column(col::kLoad);
        wants_all = opts.models.empty();
    }

    bool wanted(const std::string& name) const {
        return wants_all ||
               std::find(opts.models.begin(), opts.models.end(), name) != opts.models.end();
    }

    bool in_test(int64_t k) const {
        int64_t t = design.grid().at(k);
        return t >= opts.test_start && t < opts.test_end && !excluded[static_cast<size_t>(k)];
    }

    void score(const std::string& model, const std::string& variant,
               const std::vector<double>& forecast, const std::string& note = "") {
        Score s;
        s.model = model;
        s.variant = variant;
        s.window = "test";
        s.note = note;
        std::vector<double> y, yhat;
        for (int64_t k = 0; k < design.rows(); ++k) {
            if (!in_test(k)) continue;
            if (is_missing((*load)[k]) || is_missing(forecast[k])) continue;
            y.push_back((*load)[k]);
            yhat.push_back(forecast[k]);
        }
        if (y.empty()) {
            s.failed = true;
            s.note = "no scoreable points";
        } else {
            s.rmse_gw = rmse(y, yhat);
            s.mape_pct = mape(y, yhat);
            s.n_points = static_cast<int64_t>(y.size());
            BootstrapCi ci = bootstrap_ci(y, yhat, opts.block_len, opts.bootstrap_reps, opts.seed);
            s.ci_rmse = ci.rmse_half_width;
            s.ci_mape = ci.mape_half_width;
        }
        result.scores.push_back(std::move(s));
    }

    void fail(const std::string& model, const std::string& variant, const std::string& why) {
        Score s;
        s.model = model;
        s.variant = variant;
        s.window = "test";
        s.failed = true;
        s.note = why;
        result.scores.push_back(std::move(s));
        result.events.push_back(model + " (" + variant + ") failed: " + why);
    }

    void na(const std::string& model) {
        Score s;
        s.model = model;
        s.variant = kVariantMobility;
        s.window = "test";
        s.failed = true;
        s.note = "n.a.";
        result.scores.push_back(std::move(s));
    }
};

// Per-half-hour streams of (effect rows, loads) for the state-space models.
struct EffectStreams {
    int dim = 0;
    std::vector<std::vector<int64_t>> rows;      // per half-hour, frame row indices
    std::vector<Eigen::MatrixXd> effects;        // per half-hour, steps x dim
    std::vector<std::vector<double>> loads;      // per half-hour
    std::vector<int64_t> train_steps;            // stream steps inside the train window
};

EffectStreams build_streams(const Harness& h, const GamPrediction& base,
                            const GamPrediction* mob) {
    const SeriesFrame& design = h.design;
    const auto& hh = design.column(col::kHalfHour);
    const auto& load = *h.load;
    const int n_chains = static_cast<int>(kStepDay / design.grid().step());
    const auto base_terms = base.normalized_effects.cols();
    const auto mob_terms = mob ? mob->normalized_effects.cols() : 0;

    EffectStreams s;
    s.dim = static_cast<int>(1 + base_terms + mob_terms);
    s.rows.resize(n_chains);
    s.effects.resize(n_chains);
    s.loads.resize(n_chains);
    s.train_steps.assign(n_chains, 0);

    for (int64_t k = 0; k < design.rows(); ++k) {
        int64_t t = design.grid().at(k);
        if (t < h.opts.train_start || t >= h.opts.test_end) continue;
        if (h.excluded[static_cast<size_t>(k)]) continue;
        if (is_missing(load[k]) || is_missing(base.forecast[k])) continue;
        int chain = static_cast<int>(hh[k]);
        s.rows[chain].push_back(k);
        if (t < h.opts.train_end) ++s.train_steps[chain];
    }

    for (int c = 0; c < n_chains; ++c) {
        const auto& rows = s.rows[c];
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), s.dim);
        std::vector<double> y(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            auto r = static_cast<Eigen::Index>(i);
            x(r, 0) = 1.0;
            for (Eigen::Index j = 0; j < base_terms; ++j)
                x(r, 1 + j) = base.normalized_effects(rows[i], j);
            for (Eigen::Index j = 0; j < mob_terms; ++j) {
                double v = mob->normalized_effects(rows[i], j);
                x(r, 1 + base_terms + j) = is_missing(v) ? 0.0 : v;
            }
            y[i] = load[rows[i]];
        }
        s.effects[c] = std::move(x);
        s.loads[c] = std::move(y);
    }
    return s;
}

std::vector<double> scatter(const EffectStreams& s, int64_t n_rows,
                            const std::vector<std::vector<double>>& per_chain) {
    std::vector<double> out(static_cast<size_t>(n_rows), missing());
    for (size_t c = 0; c < s.rows.size(); ++c)
        for (size_t i = 0; i < s.rows[c].size(); ++i)
            out[static_cast<size_t>(s.rows[c][i])] = per_chain[c][i];
    return out;
}

struct KalmanForecasts {
    std::vector<double> static_fc, dynamic_fc, viking_fc;
};

KalmanForecasts run_state_space(const Harness& h, const EffectStreams& s) {
    KalmanForecasts out;
    const int n_chains = static_cast<int>(s.rows.size());
    std::vector<std::vector<double>> stat(n_chains), dyn(n_chains), vik(n_chains);
    for (int c = 0; c < n_chains; ++c) {
        if (s.rows[c].empty()) continue;
        KalmanState init = KalmanState::initial(s.dim);
        stat[c] = run_static(s.effects[c], s.loads[c], init, h.opts.static_sigma2).predictions;

        int64_t burn_start = std::min<int64_t>(s.dim + 5, std::max<int64_t>(s.train_steps[c] / 2, 1));
        NoiseConfig noise = grid_search_dynamic(s.effects[c], s.loads[c], burn_start,
                                                std::max<int64_t>(s.train_steps[c], burn_start + 1));
        dyn[c] = run_dynamic(s.effects[c], s.loads[c], KalmanState::initial(s.dim), noise)
                     .predictions;
        vik[c] = run_viking(s.effects[c], s.loads[c], KalmanState::initial(s.dim), noise,
                            h.opts.viking)
                     .predictions;
    }
    out.static_fc = scatter(s, h.design.rows(), stat);
    out.dynamic_fc = scatter(s, h.design.rows(), dyn);
    out.viking_fc = scatter(s, h.design.rows(), vik);
    return out;
}

// ML-Poly over the test window, one pool per half-hour.
std::vector<double> run_aggregation(Harness& h, const std::vector<std::string>& expert_names,
                                    const std::vector<const std::vector<double>*>& experts,
                                    const std::string& variant) {
    const SeriesFrame& design = h.design;
    const auto& hh = design.column(col::kHalfHour);
    const auto& load = *h.load;
    const int n_chains = static_cast<int>(kStepDay / design.grid().step());

    std::vector<double> out(static_cast<size_t>(design.rows()), missing());
    int64_t skipped = 0;
    for (int c = 0; c < n_chains; ++c) {
        std::vector<int64_t> rows;
        for (int64_t k = 0; k < design.rows(); ++k) {
            if (!h.in_test(k) || static_cast<int>(hh[k]) != c) continue;
            if (is_missing(load[k])) continue;
            bool any = false;
            for (const auto* e : experts)
                if (!is_missing((*e)[k])) any = true;
            if (any) rows.push_back(k);
        }
        if (rows.empty()) continue;
        std::vector<std::vector<double>> matrix(rows.size());
        std::vector<double> targets(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) {
            for (const auto* e : experts) matrix[i].push_back((*e)[rows[i]]);
            targets[i] = load[rows[i]];
        }
        ExpertPool pool(expert_names, h.opts.bound_b);
        AggregateRun run = aggregate_run(pool, matrix, targets);
        skipped += run.skipped_expert_steps;
        for (size_t i = 0; i < rows.size(); ++i) {
            out[static_cast<size_t>(rows[i])] = run.forecast[i];
            for (size_t e = 0; e < expert_names.size(); ++e)
                h.result.weight_history.push_back({design.grid().at(rows[i]),
                                                   expert_names[e] + " (" + variant + ")",
                                                   run.weights[i][e]});
        }
    }
    if (skipped > 0)
        h.result.events.push_back("aggregation (" + variant + "): " + std::to_string(skipped) +
                                  " expert values missing and renormalized");
    return out;
}

std::vector<std::string> forest_feature_set(bool with_mobility) {
    std::vector<std::string> cols = {col::kHalfHour,   col::kDayType,   col::kDls,
                                     col::kHoliday,    col::kSchoolA,   col::kSchoolB,
                                     col::kSchoolC,    col::kSummerHoliday, col::kToY,
                                     col::kTrend,      col::kTemp,      col::kTemp95,
                                     col::kTemp99,     col::kTempMin99, col::kTempMax99,
                                     col::kLoad1D,     col::kLoad1W};
    if (with_mobility) {
        cols.push_back(col::kWork);
        cols.push_back(col::kTourism);
        cols.push_back(col::kResident);
    }
    return cols;
}

struct MatrixSlice {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<int64_t> rows;
};

MatrixSlice matrix_slice(const SeriesFrame& design, const std::vector<std::string>& features,
                         const std::vector<double>& target, int64_t start, int64_t end,
                         const std::vector<bool>& excluded, bool need_target) {
    std::vector<const std::vector<double>*> cols;
    for (const auto& f : features) cols.push_back(&design.column(f));

    MatrixSlice s;
    for (int64_t k = 0; k < design.rows(); ++k) {
        int64_t t = design.grid().at(k);
        if (t < start || t >= end) continue;
        if (excluded[static_cast<size_t>(k)]) continue;
        if (need_target && is_missing(target[k])) continue;
        bool ok = true;
        for (const auto* c : cols)
            if (is_missing((*c)[k])) {
                ok = false;
                break;
            }
        if (ok) s.rows.push_back(k);
    }
    s.x.resize(static_cast<Eigen::Index>(s.rows.size()), static_cast<Eigen::Index>(cols.size()));
    s.y.resize(static_cast<Eigen::Index>(s.rows.size()));
    for (size_t i = 0; i < s.rows.size(); ++i) {
        for (size_t j = 0; j < cols.size(); ++j)
            s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (*cols[j])[s.rows[i]];
        s.y[static_cast<Eigen::Index>(i)] = need_target ? target[s.rows[i]] : 0.0;
    }
    return s;
}

std::vector<double> forest_forecast(const Harness& h, const std::vector<double>& target,
                                    BootstrapKind kind, bool with_mobility,
                                    int64_t train_start, int64_t train_end) {
    std::vector<std::string> features = forest_feature_set(with_mobility);
    MatrixSlice train =
        matrix_slice(h.design, features, target, train_start, train_end, h.excluded, true);
    if (train.rows.empty()) throw DataError("forest: no training rows");

    ForestConfig cfg = h.opts.forest;
    cfg.bootstrap = kind;
    Forest forest = fit_forest(train.x, train.y, cfg, h.opts.seed, h.opts.gam.n_threads);

    std::vector<bool> none(static_cast<size_t>(h.design.rows()), false);
    MatrixSlice all = matrix_slice(h.design, features, target, h.design.grid().start(),
                                   h.design.grid().end(), none, false);
    std::vector<double> pred = forest.predict_rows(all.x);
    std::vector<double> out(static_cast<size_t>(h.design.rows()), missing());
    for (size_t i = 0; i < all.rows.size(); ++i)
        out[static_cast<size_t>(all.rows[i])] = pred[i];
    return out;
}

std::vector<double> boost_forecast(const Harness& h, const SeriesFrame& frame,
                                   const Formula& formula, int64_t train_start,
                                   int64_t train_end) {
    const int n_chains = static_cast<int>(kStepDay / h.design.grid().step());
    std::vector<double> out(static_cast<size_t>(h.design.rows()), missing());
    GamBoostOptions bopts = h.opts.boost;
    for (int c = 0; c < n_chains; ++c) {
        std::vector<int64_t> train_rows = eligible_rows(frame, formula, train_start, train_end, c);
        if (train_rows.empty())
            throw DataError("boosting: no training rows at half-hour " + std::to_string(c));
        GamBoostModel model =
            fit_gam_boost(frame, formula.terms, formula.response, train_rows, bopts);

        // Predict wherever the formula variables are present.
        Formula vars_only = formula;
        std::vector<int64_t> all_rows =
            eligible_rows(frame, vars_only, h.design.grid().start(), h.design.grid().end(), c);
        // eligible_rows also requires the response; predict on test rows with
        // a present response is fine for the benchmark.
        std::vector<double> pred = predict_gam_boost(model, frame, all_rows);
        for (size_t i = 0; i < all_rows.size(); ++i)
            out[static_cast<size_t>(all_rows[i])] = pred[i];
    }
    return out;
}

}  // namespace

BenchResult run_benchmark(const SeriesFrame& design, const BenchOptions& opts) {
    if (!(opts.train_start < opts.train_end && opts.train_end <= opts.test_start &&
          opts.test_start < opts.test_end))
        throw DataError("benchmark windows must satisfy train < test");

    Harness h(design, opts);
    const bool mobility_possible = opts.with_mobility && design.has_column(col::kWork);

    // --- persistence ---------------------------------------------------
    if (h.wanted("persistence")) {
        h.score("persistence", kVariantBase, design.column(col::kLoad1D));
        h.na("persistence");
    }

    // --- GAM and everything built on it ---------------------------------
    GamPrediction base_pred;
    bool have_base = false;
    if (h.wanted("gam") || h.wanted("static-kalman") || h.wanted("dynamic-kalman") ||
        h.wanted("viking-lite") || h.wanted("aggregation")) {
        try {
            GamBank bank = fit_gam_bank(h.fit_design, opts.formula, opts.train_start,
                                        opts.train_end, opts.gam);
            base_pred = predict_gam(bank, design);
            have_base = true;
        } catch (const std::exception& e) {
            for (const char* m : {"gam", "static-kalman", "dynamic-kalman", "viking-lite",
                                  "aggregation"})
                if (h.wanted(m)) h.fail(m, kVariantBase, e.what());
        }
    }

    GamPrediction mob_pred;
    bool have_mob = false;
    std::vector<double> gam_mob_forecast;
    if (have_base && mobility_possible) {
        try {
            SeriesFrame aug = h.fit_design;
            const auto& load = h.fit_design.column(col::kLoad);
            std::vector<double> err(static_cast<size_t>(design.rows()), missing());
            for (int64_t k = 0; k < design.rows(); ++k)
                if (!is_missing(load[k]) && !is_missing(base_pred.forecast[k]))
                    err[static_cast<size_t>(k)] = load[k] - base_pred.forecast[k];
            aug.set_column("err", std::move(err));
            Formula resid_formula = mobility_residual_formula("err");
            GamBank resid_bank =
                fit_gam_bank(aug, resid_formula, opts.train_start, opts.train_end, opts.gam);
            mob_pred = predict_gam(resid_bank, aug);
            have_mob = true;
            gam_mob_forecast = residual_stack(base_pred.forecast, mob_pred.forecast).forecast;
        } catch (const std::exception& e) {
            h.result.events.push_back(std::string("mobility residual GAM failed: ") + e.what());
        }
    }

    if (h.wanted("gam") && have_base) {
        h.score("gam", kVariantBase, base_pred.forecast);
        if (have_mob)
            h.score("gam", kVariantMobility, gam_mob_forecast);
        else if (mobility_possible)
            h.fail("gam", kVariantMobility, "mobility residual model unavailable");
    }

    // --- state-space adaptation -----------------------------------------
    KalmanForecasts base_ss, mob_ss;
    bool have_ss = false, have_mob_ss = false;
    if (have_base && (h.wanted("static-kalman") || h.wanted("dynamic-kalman") ||
                      h.wanted("viking-lite") || h.wanted("aggregation"))) {
        try {
            EffectStreams streams = build_streams(h, base_pred, nullptr);
            base_ss = run_state_space(h, streams);
            have_ss = true;
        } catch (const std::exception& e) {
            for (const char* m : {"static-kalman", "dynamic-kalman", "viking-lite"})
                if (h.wanted(m)) h.fail(m, kVariantBase, e.what());
        }
        if (have_mob) {
            try {
                EffectStreams streams = build_streams(h, base_pred, &mob_pred);
                mob_ss = run_state_space(h, streams);
                have_mob_ss = true;
            } catch (const std::exception& e) {
                for (const char* m : {"static-kalman", "dynamic-kalman", "viking-lite"})
                    if (h.wanted(m)) h.fail(m, kVariantMobility, e.what());
            }
        }
    }
    if (have_ss) {
        if (h.wanted("static-kalman")) {
            h.score("static-kalman", kVariantBase, base_ss.static_fc);
            if (have_mob_ss) h.score("static-kalman", kVariantMobility, mob_ss.static_fc);
        }
        if (h.wanted("dynamic-kalman")) {
            h.score("dynamic-kalman", kVariantBase, base_ss.dynamic_fc);
            if (have_mob_ss) h.score("dynamic-kalman", kVariantMobility, mob_ss.dynamic_fc);
        }
        if (h.wanted("viking-lite")) {
            h.score("viking-lite", kVariantBase, base_ss.viking_fc);
            if (have_mob_ss) h.score("viking-lite", kVariantMobility, mob_ss.viking_fc);
        }
    }

    // --- aggregation of the data-assimilation experts --------------------
    if (h.wanted("aggregation") && have_base && have_ss) {
        try {
            std::vector<double> agg = run_aggregation(
                h, {"gam", "static-kalman", "dynamic-kalman", "viking-lite"},
                {&base_pred.forecast, &base_ss.static_fc, &base_ss.dynamic_fc, &base_ss.viking_fc},
                kVariantBase);
            h.score("aggregation", kVariantBase, agg);
        } catch (const std::exception& e) {
            h.fail("aggregation", kVariantBase, e.what());
        }
        if (have_mob_ss) {
            try {
                std::vector<double> agg = run_aggregation(
                    h, {"gam", "static-kalman", "dynamic-kalman", "viking-lite"},
                    {&gam_mob_forecast, &mob_ss.static_fc, &mob_ss.dynamic_fc, &mob_ss.viking_fc},
                    kVariantMobility);
                h.score("aggregation", kVariantMobility, agg);
            } catch (const std::exception& e) {
                h.fail("aggregation", kVariantMobility, e.what());
            }
        }
    }

    // --- GAM boosting -----------------------------------------------------
    std::vector<double> boost_base;
    bool have_boost = false;
    if (h.wanted("gam-boosting")) {
        try {
            boost_base = boost_forecast(h, h.fit_design, opts.formula, opts.train_start,
                                        opts.train_end);
            have_boost = true;
            h.score("gam-boosting", kVariantBase, boost_base);
        } catch (const std::exception& e) {
            h.fail("gam-boosting", kVariantBase, e.what());
        }
        if (have_boost && mobility_possible) {
            try {
                SeriesFrame aug = h.fit_design;
                const auto& load = h.fit_design.column(col::kLoad);
                std::vector<double> err(static_cast<size_t>(design.rows()), missing());
                for (int64_t k = 0; k < design.rows(); ++k)
                    if (!is_missing(load[k]) && !is_missing(boost_base[k]))
                        err[static_cast<size_t>(k)] = load[k] - boost_base[k];
                aug.set_column("err", std::move(err));
                Formula bf = opts.formula;
                bf.response = "err";
                bf.terms.push_back(SmoothTerm{col::kWork, 5, false});
                bf.terms.push_back(SmoothTerm{col::kTourism, 5, false});
                bf.terms.push_back(SmoothTerm{col::kResident, 5, false});
                std::vector<double> resid =
                    boost_forecast(h, aug, bf, opts.train_start, opts.train_end);
                h.score("gam-boosting", kVariantMobility,
                        residual_stack(boost_base, resid).forecast);
            } catch (const std::exception& e) {
                h.fail("gam-boosting", kVariantMobility, e.what());
            }
        }
    }

    // --- random forests ----------------------------------------------------
    const auto& load_col = h.fit_design.column(col::kLoad);
    std::vector<double> rf_block_base;
    bool have_rf_block = false;
    if (h.wanted("rf") || h.wanted("rf-block")) {
        try {
            rf_block_base = forest_forecast(h, load_col, BootstrapKind::Block, false,
                                            opts.train_start, opts.train_end);
            have_rf_block = true;
        } catch (const std::exception& e) {
            if (h.wanted("rf-block")) h.fail("rf-block", kVariantBase, e.what());
        }
    }
    auto stack_forest = [&](const std::string& name, BootstrapKind resid_kind) {
        // Mobility variant: the block-bootstrap base plus a residual forest
        // on every variable, trained in the deletion framework.
        try {
            if (!have_rf_block) throw DataError("base forest unavailable");
            std::vector<double> err(static_cast<size_t>(design.rows()), missing());
            for (int64_t k = 0; k < design.rows(); ++k)
                if (!is_missing(load_col[k]) && !is_missing(rf_block_base[k]))
                    err[static_cast<size_t>(k)] = load_col[k] - rf_block_base[k];
            std::vector<double> resid = forest_forecast(h, err, resid_kind, true,
                                                        opts.train_start, opts.train_end);
            h.score(name, kVariantMobility, residual_stack(rf_block_base, resid).forecast);
        } catch (const std::exception& e) {
            h.fail(name, kVariantMobility, e.what());
        }
    };
    if (h.wanted("rf")) {
        try {
            std::vector<double> rf = forest_forecast(h, load_col, BootstrapKind::Iid, false,
                                                     opts.train_start, opts.train_end);
            h.score("rf", kVariantBase, rf);
        } catch (const std::exception& e) {
            h.fail("rf", kVariantBase, e.what());
        }
        if (mobility_possible) stack_forest("rf", BootstrapKind::Iid);
    }
    if (h.wanted("rf-block")) {
        if (have_rf_block) h.score("rf-block", kVariantBase, rf_block_base);
        if (mobility_possible) stack_forest("rf-block", BootstrapKind::Block);
    }

    return h.result;
}

}  // namespace loadcast
