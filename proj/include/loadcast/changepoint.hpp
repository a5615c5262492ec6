#pragma once

#include <cstdint>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

struct ChangePoint {
    int64_t index = 0;        // first index of the right-hand segment
    double cost_reduction = 0.0;
    int rank = 0;             // 1 = discovered first
    double left_mean = 0.0;   // segment means at discovery time
    double right_mean = 0.0;
    double jump() const { return right_mean - left_mean; }
};

struct ChangePointReport {
    std::vector<ChangePoint> points;  // discovery order
    double total_cost_reduction = 0.0;

    std::vector<int64_t> sorted_indices() const;
};

// Greedy binary segmentation on the within-segment sum of squared deviations.
// Each round splits the segment whose best split reduces the cost most;
// candidates keep both sides at least min_seg long. Splits that do not
// reduce the cost are not taken.
ChangePointReport binseg(const std::vector<double>& series, int max_cp, int64_t min_seg = 2);

// Piecewise-constant segment means given sorted change-point indices.
std::vector<double> segment_means(const std::vector<double>& series,
                                  const std::vector<int64_t>& change_points);

// Keeps change points in discovery order while |jump| >= kappa * sd; stops at
// the first failure.
ChangePointReport significance_filter(const ChangePointReport& report, double residual_sd,
                                      double kappa = 0.25);

struct ResidualDiagnostics {
    double mean = 0.0;
    double sd = 0.0;          // population sd
    double skew = 0.0;
    double kurtosis = 0.0;    // excess
    double t_stat = 0.0;      // mean vs 0
    std::vector<double> acf;  // lags 1..L, denominator n
    double ljung_box = 0.0;   // Q over the 1-day window of lags
    int ljung_box_lags = 0;
    bool degenerate = false;  // constant input
};

ResidualDiagnostics residual_diagnostics(const std::vector<double>& residuals, int max_lag = 48);

enum class SavingsKind { MeanOfRatios, RatioOfMeans };

// Mean of res_t / load_hat_t over the window, in percent.
double savings_percent(const std::vector<double>& residuals, const std::vector<double>& loads_hat,
                       SavingsKind kind = SavingsKind::MeanOfRatios);

}  // namespace loadcast
