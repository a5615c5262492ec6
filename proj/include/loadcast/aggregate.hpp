#pragma once

#include <string>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// ML-Poly online aggregation: weights follow the positive part of the
// cumulative regret with per-expert learning rates; no tuning parameter.
class ExpertPool {
public:
    ExpertPool(std::vector<std::string> names, double bound = 100.0);

    const std::vector<std::string>& names() const { return names_; }
    size_t size() const { return names_.size(); }
    double bound() const { return bound_; }
    int64_t step() const { return step_; }

    // Weights the next forecast would use (pre-update).
    std::vector<double> weights() const;
    const std::vector<double>& cumulative_regret() const { return regret_; }

    // Forms the aggregate with pre-update weights, then updates regrets and
    // learning rates with the observed value. Returns the aggregate forecast.
    double step(const std::vector<double>& forecasts, double observed);

private:
    std::vector<std::string> names_;
    std::vector<double> regret_;
    std::vector<double> regret_sq_sum_;
    double bound_;
    int64_t step_ = 0;
};

struct AggregateRun {
    std::vector<double> forecast;               // aligned with the expert matrix rows
    std::vector<std::vector<double>> weights;   // per step, per expert (as used)
    int64_t skipped_expert_steps = 0;           // expert values missing at a step
};

// Per-step aggregation over an expert matrix (rows = time, columns =
// experts); missing expert values are excluded from that step with the
// remaining weights renormalized.
AggregateRun aggregate_run(ExpertPool& pool, const std::vector<std::vector<double>>& experts,
                           const std::vector<double>& targets);

}  // namespace loadcast
