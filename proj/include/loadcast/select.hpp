#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "loadcast/timegrid.hpp"

namespace loadcast {

struct RankedFeature {
    std::string name;
    double score = 0.0;
    double std_error = 0.0;  // Shapley only
};

struct RankingReport {
    std::string method;
    std::vector<RankedFeature> ranking;  // method-specific order
    std::string correction;             // e.g. "load \\ (temp95)"
    bool degenerate = false;
};

// Plug-in estimate on equal-frequency bins, in nats. A constant column gives
// 0 with *degenerate set.
double mutual_information(const std::vector<double>& x, const std::vector<double>& y, int bins,
                          bool* degenerate = nullptr);

// ceil(n^(1/3)) capped at 16.
int default_mi_bins(int64_t n);

// Greedy mRMR: max MI with the target, minus the mean MI with the already
// selected set; ties go to column order.
RankingReport mrmr_rank(const std::vector<std::vector<double>>& features,
                        const std::vector<std::string>& names, const std::vector<double>& target,
                        int k, int bins = 0);

// Hoeffding's D from the rank formula (mid-ranks for ties), scaled by the
// conventional factor of 30 so values lie in about [-0.5, 1].
double hoeffding_d(const std::vector<double>& x, const std::vector<double>& y);

RankingReport hoeffding_rank(const std::vector<std::vector<double>>& features,
                             const std::vector<std::string>& names,
                             const std::vector<double>& target);

// Fits on (X, y) and returns in-sample predictions.
using ModelFitter = std::function<std::vector<double>(const Eigen::MatrixXd& x,
                                                      const std::vector<double>& y)>;

// Monte-Carlo permutation Shapley values of the explained variance (R^2).
// Subset values are cached, so at most min(2^p, M*p) model fits run.
RankingReport shapley_importance(const ModelFitter& fitter,
                                 const std::vector<std::vector<double>>& features,
                                 const std::vector<std::string>& names,
                                 const std::vector<double>& target, int permutations,
                                 std::mt19937_64& rng);

// Residual target after removing the effect of `remove` via penalized-spline
// regression; features with few distinct values enter linearly.
std::vector<double> correct_for(const std::vector<std::vector<double>>& features,
                                const std::vector<std::string>& names,
                                const std::vector<double>& target,
                                const std::vector<std::string>& remove);

}  // namespace loadcast
