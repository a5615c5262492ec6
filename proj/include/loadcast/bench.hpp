#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loadcast/aggregate.hpp"
#include "loadcast/ensemble.hpp"
#include "loadcast/gam.hpp"
#include "loadcast/kalman.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/synth.hpp"

namespace loadcast {

// Base + residual combination: base everywhere, plus the residual model's
// output where it is available.
struct StackedRun {
    std::vector<double> forecast;
    std::vector<bool> used_residual;
};
StackedRun residual_stack(const std::vector<double>& base_forecast,
                          const std::vector<double>& residual_forecast);

// Fits the mobility residual GAM on err = load - base over the training
// window (deletion framework: only rows with mobility present) and returns
// the stacked forecast. Throws DataError when no mobility rows overlap the
// training window.
StackedRun stack_with_residual_gam(const SeriesFrame& design,
                                   const std::vector<double>& base_forecast,
                                   int64_t train_start, int64_t train_end,
                                   const Formula& residual_formula,
                                   const GamFitOptions& opts = {});

struct BenchOptions {
    Formula formula = full_model_formula();
    int64_t train_start = 0;
    int64_t train_end = 0;
    int64_t test_start = 0;
    int64_t test_end = 0;
    bool exclude_holidays = false;
    bool with_mobility = true;
    std::vector<std::string> models;  // empty = every registered model

    int bootstrap_reps = 1000;
    int64_t block_len = 48;
    double bound_b = 100.0;
    uint64_t seed = 1;

    GamFitOptions gam;
    ForestConfig forest;        // paper defaults: 1000 trees, depth 6
    GamBoostOptions boost;      // 500 steps, shrinkage 0.1
    VikingHyper viking{0.05, 0.05};
    double static_sigma2 = 1.0;
};

struct WeightRecord {
    int64_t timestamp = 0;
    std::string expert;
    double weight = 0.0;
};

struct BenchResult {
    std::vector<Score> scores;
    std::vector<WeightRecord> weight_history;
    std::vector<std::string> events;
};

// The registered model names, in report order.
std::vector<std::string> benchmark_model_names();

// Full benchmark over a prepared design frame (build_design output). Each
// model row runs independently; failures mark the row and the run continues.
BenchResult run_benchmark(const SeriesFrame& design, const BenchOptions& opts);

// Day-level exclusion set for the holiday mode: holidays plus the days
// directly before and after.
std::vector<bool> holiday_exclusion_mask(const SeriesFrame& design);

}  // namespace loadcast
