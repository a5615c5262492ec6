#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "loadcast/features.hpp"
#include "loadcast/formula.hpp"
#include "loadcast/spline.hpp"
#include "loadcast/timegrid.hpp"

namespace loadcast {

// One fitted formula term: its design-column block plus everything needed to
// rebuild that block for new rows.
struct FittedTerm {
    FormulaTerm spec;
    std::string label;
    int col_start = 0;
    int col_count = 0;
    bool penalized = false;
    double lambda = 0.0;

    SplineBasis basis1;  // smooth, or tensor marginal 1
    SplineBasis basis2;  // tensor marginal 2
    bool linear_marginal1 = false;  // tensor with a 2-column linear first marginal
    double lin_scale_a = 0.0, lin_scale_b = 1.0;

    std::vector<double> centering;               // training column means (smooth/tensor)
    std::vector<std::pair<int, int>> cat_levels; // interaction levels, baseline dropped
    std::vector<int> by_levels;                  // lagterm slope levels

    // Training statistics of the fitted effect, for the normalized export.
    double effect_mean = 0.0;
    double effect_sd = 1.0;
};

struct GamModel {
    int half_hour = 0;
    Eigen::VectorXd coef;  // [intercept, blocks...]
    std::vector<FittedTerm> terms;
    double resid_variance = 0.0;
    double edf = 0.0;
    int64_t n_train = 0;
};

struct GamBank {
    Formula formula;
    int64_t train_start = 0;
    int64_t train_end = 0;
    std::vector<GamModel> models;  // one per half-hour, 48 on half-hourly data
};

struct GamFitOptions {
    std::vector<double> lambda_grid = default_lambda_grid();
    int gcv_passes = 2;
    int min_rows_per_dim = 10;
    int n_threads = 0;  // 0 = hardware concurrency
    // te() first marginal built as {1, x} instead of a spline for this
    // variable; keeps the long-time-scale direction of te(trend, temp) linear.
    std::string linear_tensor_var = "trend";
};

// Rows eligible for fitting half-hour h in [start, end): all formula columns
// present. `halfhour` column required on the design frame.
std::vector<int64_t> eligible_rows(const SeriesFrame& design, const Formula& formula,
                                   int64_t window_start, int64_t window_end, int half_hour);

// Single-model fit on explicit rows (the bank fit calls this per half-hour).
GamModel fit_gam_model(const SeriesFrame& design, const Formula& formula,
                       const std::vector<int64_t>& rows, int half_hour,
                       const GamFitOptions& opts = {});

GamBank fit_gam_bank(const SeriesFrame& design, const Formula& formula, int64_t window_start,
                     int64_t window_end, const GamFitOptions& opts = {});

struct GamPrediction {
    std::vector<double> forecast;        // frame-aligned, NaN where undefined
    Eigen::MatrixXd effects;             // rows x terms, GW
    Eigen::MatrixXd normalized_effects;  // rows x terms, z-scored by training stats
    int64_t n_clamped = 0;               // spline inputs outside the training range
};

GamPrediction predict_gam(const GamBank& bank, const SeriesFrame& design);

// Per-term design block for new rows (used by prediction and tests).
Eigen::MatrixXd term_design(const FittedTerm& term, const SeriesFrame& design,
                            const std::vector<int64_t>& rows, int64_t* n_clamped = nullptr);
Eigen::MatrixXd term_penalty(const FittedTerm& term);

// Learns a term's state (knot ranges, levels) from training rows. Centering
// is filled in when the term's design block is first built for fitting.
FittedTerm init_fitted_term(const FormulaTerm& spec, const SeriesFrame& design,
                            const std::vector<int64_t>& rows, const GamFitOptions& opts = {});

// Seasonality-only model: calendar and temperature effects, no trend or lags.
Formula seasonality_formula();
GamBank seasonality_gam(const SeriesFrame& design, int64_t window_start, int64_t window_end,
                        const GamFitOptions& opts = {});

// The full-model formula with calendar, lag, trend and temperature terms.
Formula full_model_formula();
// Residual-model formula over the mobility indices.
Formula mobility_residual_formula(const std::string& response = "err");

struct NestedModelScore {
    std::string model;
    std::string window;
    double rmse = 0.0;
    double mape = 0.0;
};

struct SmoothFStat {
    std::string model;
    std::string term;
    double f_stat = 0.0;
    double df_num = 0.0;
    double df_den = 0.0;
};

struct NestedSuiteResult {
    std::vector<NestedModelScore> scores;
    std::vector<SmoothFStat> f_stats;
    std::vector<std::string> failures;  // "model: reason", fit continues past them
};

struct EvalWindow {
    std::string name;
    int64_t start = 0;
    int64_t end = 0;
};

// The seven formulas of the mobility-integration comparison, keyed by name.
std::vector<std::pair<std::string, Formula>> nested_model_set();

NestedSuiteResult nested_gam_suite(const SeriesFrame& design, int64_t train_start,
                                   int64_t train_end, const std::vector<EvalWindow>& windows,
                                   bool with_f_stats = true, const GamFitOptions& opts = {});

}  // namespace loadcast
