#include "loadcast/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace loadcast {

double rmse(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size()) throw DataError("rmse: length mismatch");
    if (y.empty()) throw DataError("rmse: empty series");
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - yhat[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(y.size()));
}

double mape(const std::vector<double>& y, const std::vector<double>& yhat) {
    if (y.size() != yhat.size()) throw DataError("mape: length mismatch");
    if (y.empty()) throw DataError("mape: empty series");
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) throw DataError("mape: zero target at index " + std::to_string(i));
        acc += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    }
    return 100.0 * acc / static_cast<double>(y.size());
}

namespace {

// Indices of one circular block-bootstrap resample of size n.
std::vector<size_t> circular_block_indices(size_t n, int64_t block_len, std::mt19937_64& rng) {
    std::vector<size_t> idx;
    idx.reserve(n);
    std::uniform_int_distribution<size_t> start(0, n - 1);
    while (idx.size() < n) {
        size_t s = start(rng);
        for (int64_t j = 0; j < block_len && idx.size() < n; ++j) idx.push_back((s + j) % n);
    }
    return idx;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    double pos = p * static_cast<double>(v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

BootstrapCi bootstrap_ci(const std::vector<double>& y, const std::vector<double>& yhat,
                         int64_t block_len, int reps, uint64_t seed, double level) {
    if (reps < 500) throw DataError("bootstrap needs at least 500 replicates");
    if (y.size() != yhat.size() || y.empty()) throw DataError("bootstrap: bad input lengths");
    block_len = std::clamp<int64_t>(block_len, 1, static_cast<int64_t>(y.size()));

    std::mt19937_64 rng(seed);
    std::vector<double> rmses(reps), mapes(reps);
    std::vector<double> ry(y.size()), ryh(y.size());
    for (int r = 0; r < reps; ++r) {
        auto idx = circular_block_indices(y.size(), block_len, rng);
        for (size_t i = 0; i < idx.size(); ++i) {
            ry[i] = y[idx[i]];
            ryh[i] = yhat[idx[i]];
        }
        rmses[r] = rmse(ry, ryh);
        mapes[r] = mape(ry, ryh);
    }
    double alpha = 1.0 - level;
    BootstrapCi ci;
    ci.rmse_half_width = 0.5 * (percentile(rmses, 1.0 - alpha / 2) - percentile(rmses, alpha / 2));
    ci.mape_half_width = 0.5 * (percentile(mapes, 1.0 - alpha / 2) - percentile(mapes, alpha / 2));
    return ci;
}

double bootstrap_ci_rmse(const std::vector<double>& errors, int64_t block_len, int reps,
                         uint64_t seed, double level) {
    // rmse(errors, 0) is the metric of interest on the error series itself.
    std::vector<double> zeros(errors.size(), 0.0);
    if (reps < 500) throw DataError("bootstrap needs at least 500 replicates");
    std::mt19937_64 rng(seed);
    std::vector<double> stats(reps);
    std::vector<double> re(errors.size());
    block_len = std::clamp<int64_t>(block_len, 1, static_cast<int64_t>(errors.size()));
    for (int r = 0; r < reps; ++r) {
        auto idx = circular_block_indices(errors.size(), block_len, rng);
        for (size_t i = 0; i < idx.size(); ++i) re[i] = errors[idx[i]];
        stats[r] = rmse(re, zeros);
    }
    double alpha = 1.0 - level;
    return 0.5 * (percentile(stats, 1.0 - alpha / 2) - percentile(stats, alpha / 2));
}

}  // namespace loadcast
