#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

double rmse(const std::vector<double>& y, const std::vector<double>& yhat);
// Mean absolute percentage error, in percent. Requires y_t != 0.
double mape(const std::vector<double>& y, const std::vector<double>& yhat);

struct Score {
    std::string model;
    std::string variant;  // "base" or "mobility" ("n.a." when not applicable)
    std::string window;
    double rmse_gw = 0.0;
    double mape_pct = 0.0;
    double ci_rmse = 0.0;  // 95% half-width
    double ci_mape = 0.0;
    int64_t n_points = 0;
    bool failed = false;
    std::string note;
};

// Circular block bootstrap of the paired error series; returns the 95%
// percentile half-width of the metric distribution.
struct BootstrapCi {
    double rmse_half_width = 0.0;
    double mape_half_width = 0.0;
};
BootstrapCi bootstrap_ci(const std::vector<double>& y, const std::vector<double>& yhat,
                         int64_t block_len, int reps, uint64_t seed, double level = 0.95);

// Half-width for a plain error series and a metric computed on it (used by
// the acceptance oracle checks on iid errors).
double bootstrap_ci_rmse(const std::vector<double>& errors, int64_t block_len, int reps,
                         uint64_t seed, double level = 0.95);

}  // namespace loadcast
