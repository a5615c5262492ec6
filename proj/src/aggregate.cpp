#include "loadcast/aggregate.hpp"

#include <cmath>

#include "loadcast/timegrid.hpp"

namespace loadcast {

ExpertPool::ExpertPool(std::vector<std::string> names, double bound)
    : names_(std::move(names)),
      regret_(names_.size(), 0.0),
      regret_sq_sum_(names_.size(), 0.0),
      bound_(bound) {
    if (names_.empty()) throw DataError("expert pool needs at least one expert");
}

std::vector<double> ExpertPool::weights() const {
    const size_t n = names_.size();
    std::vector<double> w(n, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double eta = 1.0 / (1.0 + regret_sq_sum_[i]);
        w[i] = eta * std::max(regret_[i], 0.0);
        total += w[i];
    }
    if (total <= 0.0) {
        for (auto& x : w) x = 1.0 / static_cast<double>(n);
    } else {
        for (auto& x : w) x /= total;
    }
    return w;
}

double ExpertPool::step(const std::vector<double>& forecasts, double observed) {
    if (forecasts.size() != names_.size()) throw DataError("mlpoly: expert count mismatch");
    if (!std::isfinite(observed)) throw DataError("mlpoly: non-finite observation");
    for (double f : forecasts)
        if (!std::isfinite(f)) throw DataError("mlpoly: non-finite expert forecast");

    std::vector<double> w = weights();
    double aggregate = 0.0;
    for (size_t i = 0; i < forecasts.size(); ++i) aggregate += w[i] * forecasts[i];

    double agg_loss = (aggregate - observed) * (aggregate - observed);
    for (size_t i = 0; i < forecasts.size(); ++i) {
        double expert_loss = (forecasts[i] - observed) * (forecasts[i] - observed);
        double r = agg_loss - expert_loss;
        regret_[i] += r;
        regret_sq_sum_[i] += r * r;
    }
    ++step_;
    return aggregate;
}

AggregateRun aggregate_run(ExpertPool& pool, const std::vector<std::vector<double>>& experts,
                           const std::vector<double>& targets) {
    if (experts.size() != targets.size())
        throw DataError("aggregate: expert matrix rows do not match targets");

    AggregateRun run;
    run.forecast.reserve(targets.size());
    run.weights.reserve(targets.size());

    const size_t n = pool.size();
    for (size_t t = 0; t < targets.size(); ++t) {
        if (experts[t].size() != n) throw DataError("aggregate: expert count mismatch");

        std::vector<bool> present(n);
        size_t n_present = 0;
        for (size_t i = 0; i < n; ++i) {
            present[i] = !is_missing(experts[t][i]);
            if (present[i]) ++n_present;
        }
        if (n_present == 0) {
            run.forecast.push_back(missing());
            run.weights.push_back(pool.weights());
            continue;
        }

        if (n_present == n) {
            run.weights.push_back(pool.weights());
            run.forecast.push_back(pool.step(experts[t], targets[t]));
            continue;
        }

        // A missing expert sits out this step: renormalize the others and
        // feed the pool a copy where the absentee forecasts the aggregate
        // (zero instantaneous regret, so its state is untouched).
        run.skipped_expert_steps += static_cast<int64_t>(n - n_present);
        std::vector<double> w = pool.weights();
        double wsum = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (present[i]) wsum += w[i];
        double aggregate = 0.0;
        if (wsum > 0.0) {
            for (size_t i = 0; i < n; ++i)
                if (present[i]) aggregate += (w[i] / wsum) * experts[t][i];
        } else {
            for (size_t i = 0; i < n; ++i)
                if (present[i]) aggregate += experts[t][i] / static_cast<double>(n_present);
        }
        std::vector<double> padded(n);
        std::vector<double> used(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            padded[i] = present[i] ? experts[t][i] : aggregate;
            if (wsum > 0.0 && present[i]) used[i] = w[i] / wsum;
            else if (present[i]) used[i] = 1.0 / static_cast<double>(n_present);
        }
        run.weights.push_back(std::move(used));
        run.forecast.push_back(pool.step(padded, targets[t]));
    }
    return run;
}

}  // namespace loadcast
