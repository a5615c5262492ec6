#include "loadcast/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "loadcast/spline.hpp"

namespace loadcast {

namespace {

// Equal-frequency bin labels via the rank order; ties keep their sort order,
// which makes the estimate deterministic.
std::vector<int> ef_bins(const std::vector<double>& x, int bins, bool* constant) {
    const auto n = static_cast<int64_t>(x.size());
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int64_t a, int64_t b) { return x[a] < x[b]; });
    if (constant) *constant = x[order.front()] == x[order.back()];
    std::vector<int> label(n);
    for (int64_t r = 0; r < n; ++r)
        label[order[r]] = static_cast<int>((r * bins) / n);
    return label;
}

}  // namespace

int default_mi_bins(int64_t n) {
    int bins = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n))));
    return std::clamp(bins, 2, 16);
}

double mutual_information(const std::vector<double>& x, const std::vector<double>& y, int bins,
                          bool* degenerate) {
    if (x.size() != y.size()) throw DataError("mutual information: length mismatch");
    if (bins < 2) throw DataError("mutual information needs at least 2 bins");
    const auto n = static_cast<int64_t>(x.size());
    if (n < 10 * bins)
        throw DataError("mutual information needs at least 10 samples per bin");

    bool cx = false, cy = false;
    std::vector<int> bx = ef_bins(x, bins, &cx);
    std::vector<int> by = ef_bins(y, bins, &cy);
    if (degenerate) *degenerate = cx || cy;
    if (cx || cy) return 0.0;

    std::vector<double> joint(static_cast<size_t>(bins) * bins, 0.0);
    std::vector<double> px(bins, 0.0), py(bins, 0.0);
    double w = 1.0 / static_cast<double>(n);
    for (int64_t i = 0; i < n; ++i) {
        joint[static_cast<size_t>(bx[i]) * bins + by[i]] += w;
        px[bx[i]] += w;
        py[by[i]] += w;
    }
    double mi = 0.0;
    for (int a = 0; a < bins; ++a)
        for (int b = 0; b < bins; ++b) {
            double p = joint[static_cast<size_t>(a) * bins + b];
            if (p > 0.0) mi += p * std::log(p / (px[a] * py[b]));
        }
    return std::max(0.0, mi);
}

RankingReport mrmr_rank(const std::vector<std::vector<double>>& features,
                        const std::vector<std::string>& names, const std::vector<double>& target,
                        int k, int bins) {
    if (features.size() != names.size()) throw DataError("mrmr: name/feature count mismatch");
    if (k < 1 || k > static_cast<int>(features.size()))
        throw DataError("mrmr: k outside feature count");
    if (bins <= 0) bins = default_mi_bins(static_cast<int64_t>(target.size()));

    const int p = static_cast<int>(features.size());
    std::vector<double> relevance(p);
    for (int j = 0; j < p; ++j) {
        bool flag = false;
        relevance[j] = mutual_information(features[j], target, bins, &flag);
    }

    RankingReport report;
    report.method = "mrmr";
    std::vector<bool> used(p, false);
    std::map<std::pair<int, int>, double> pair_mi;
    auto redundancy = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = pair_mi.find(key);
        if (it != pair_mi.end()) return it->second;
        double v = mutual_information(features[a], features[b], bins);
        pair_mi[key] = v;
        return v;
    };

    std::vector<int> selected;
    for (int round = 0; round < k; ++round) {
        int pick = -1;
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < p; ++j) {
            if (used[j]) continue;
            double score = relevance[j];
            if (!selected.empty()) {
                double red = 0.0;
                for (int s : selected) red += redundancy(j, s);
                score -= red / static_cast<double>(selected.size());
            }
            if (score > best + 1e-15) {  // ties keep column order
                best = score;
                pick = j;
            }
        }
        used[pick] = true;
        selected.push_back(pick);
        report.ranking.push_back({names[pick], best, 0.0});
    }
    return report;
}

double hoeffding_d(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("hoeffding: length mismatch");
    const auto n = static_cast<int64_t>(x.size());
    if (n < 5) throw DataError("hoeffding needs at least 5 points");

    auto c = [](double u) { return u > 0.0 ? 1.0 : (u == 0.0 ? 0.5 : 0.0); };

    std::vector<double> r(n, 1.0), s(n, 1.0), q(n, 1.0);
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double cx = c(x[i] - x[j]);
            double cy = c(y[i] - y[j]);
            r[i] += cx;
            s[i] += cy;
            q[i] += cx * cy;
        }
    }

    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        d1 += (q[i] - 1.0) * (q[i] - 2.0);
        d2 += (r[i] - 1.0) * (r[i] - 2.0) * (s[i] - 1.0) * (s[i] - 2.0);
        d3 += (r[i] - 2.0) * (s[i] - 2.0) * (q[i] - 1.0);
    }
    double nd = static_cast<double>(n);
    double denom = nd * (nd - 1.0) * (nd - 2.0) * (nd - 3.0) * (nd - 4.0);
    return 30.0 * ((nd - 2.0) * (nd - 3.0) * d1 + d2 - 2.0 * (nd - 2.0) * d3) / denom;
}

RankingReport hoeffding_rank(const std::vector<std::vector<double>>& features,
                             const std::vector<std::string>& names,
                             const std::vector<double>& target) {
    RankingReport report;
    report.method = "hoeffding";
    for (size_t j = 0; j < features.size(); ++j)
        report.ranking.push_back({names[j], hoeffding_d(features[j], target), 0.0});
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [](const RankedFeature& a, const RankedFeature& b) {
                         return a.score > b.score;
                     });
    return report;
}

RankingReport shapley_importance(const ModelFitter& fitter,
                                 const std::vector<std::vector<double>>& features,
                                 const std::vector<std::string>& names,
                                 const std::vector<double>& target, int permutations,
                                 std::mt19937_64& rng) {
    if (permutations < 50) throw DataError("shapley needs at least 50 permutations");
    const int p = static_cast<int>(features.size());
    const auto n = static_cast<int64_t>(target.size());

    double ymean = 0.0;
    for (double v : target) ymean += v;
    ymean /= static_cast<double>(n);
    double sst = 0.0;
    for (double v : target) sst += (v - ymean) * (v - ymean);

    std::map<std::vector<bool>, double> cache;
    auto value = [&](const std::vector<bool>& subset) {
        auto it = cache.find(subset);
        if (it != cache.end()) return it->second;
        int count = static_cast<int>(std::count(subset.begin(), subset.end(), true));
        double r2 = 0.0;
        if (count > 0 && sst > 0.0) {
            Eigen::MatrixXd x(n, count);
            int col = 0;
            for (int j = 0; j < p; ++j) {
                if (!subset[j]) continue;
                for (int64_t i = 0; i < n; ++i) x(i, col) = features[j][i];
                ++col;
            }
            std::vector<double> pred = fitter(x, target);
            double sse = 0.0;
            for (int64_t i = 0; i < n; ++i) sse += (target[i] - pred[i]) * (target[i] - pred[i]);
            r2 = 1.0 - sse / sst;
        }
        cache[subset] = r2;
        return r2;
    };

    std::vector<bool> full(p, true);
    double r2_full = value(full);

    RankingReport report;
    report.method = "shapley";
    if (r2_full <= 0.0) {
        report.degenerate = true;
        for (int j = 0; j < p; ++j) report.ranking.push_back({names[j], 0.0, 0.0});
        return report;
    }

    std::vector<double> sums(p, 0.0), sumsq(p, 0.0);
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    for (int m = 0; m < permutations; ++m) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<bool> subset(p, false);
        double prev = 0.0;
        for (int j : order) {
            subset[j] = true;
            double cur = value(subset);
            double marginal = cur - prev;
            sums[j] += marginal;
            sumsq[j] += marginal * marginal;
            prev = cur;
        }
    }

    for (int j = 0; j < p; ++j) {
        double mean = sums[j] / permutations;
        double var = sumsq[j] / permutations - mean * mean;
        double se = std::sqrt(std::max(0.0, var) / permutations);
        report.ranking.push_back({names[j], mean, se});
    }
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [](const RankedFeature& a, const RankedFeature& b) {
                         return a.score > b.score;
                     });
    return report;
}

std::vector<double> correct_for(const std::vector<std::vector<double>>& features,
                                const std::vector<std::string>& names,
                                const std::vector<double>& target,
                                const std::vector<std::string>& remove) {
    if (remove.empty()) return target;
    const auto n = static_cast<int64_t>(target.size());

    // Assemble a small penalized design: spline blocks for continuous
    // removals, single columns for near-categorical ones.
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::MatrixXd> penalties;
    int total = 1;
    for (const auto& name : remove) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DataError("correct_for: unknown feature '" + name + "'");
        const auto& x = features[static_cast<size_t>(it - names.begin())];
        std::set<double> distinct(x.begin(), x.end());
        if (distinct.size() <= 7) {
            Eigen::MatrixXd block(n, 1);
            for (int64_t i = 0; i < n; ++i) block(i, 0) = x[i];
            blocks.push_back(block);
            penalties.push_back(Eigen::MatrixXd::Zero(1, 1));
        } else {
            auto [lo, hi] = std::minmax_element(x.begin(), x.end());
            SplineBasis basis = SplineBasis::uniform(*lo, *hi, 8);
            Eigen::MatrixXd block = bspline_design(x, basis);
            Eigen::VectorXd means = block.colwise().mean();
            block.rowwise() -= means.transpose();
            double ridge = 1e-8 * block.squaredNorm() / static_cast<double>(block.cols());
            Eigen::MatrixXd pen = second_difference_penalty(basis.dim(), false);
            pen.diagonal().array() += ridge;
            blocks.push_back(block);
            penalties.push_back(pen);
        }
        total += static_cast<int>(blocks.back().cols());
    }

    Eigen::MatrixXd x(n, total);
    Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(total, total);
    x.col(0).setOnes();
    int offset = 1;
    for (size_t b = 0; b < blocks.size(); ++b) {
        x.block(0, offset, n, blocks[b].cols()) = blocks[b];
        penalty.block(offset, offset, blocks[b].cols(), blocks[b].cols()) = penalties[b];
        offset += static_cast<int>(blocks[b].cols());
    }

    Eigen::VectorXd y(n);
    for (int64_t i = 0; i < n; ++i) y[i] = target[i];
    double lambda = select_lambda(x, penalty, y, default_lambda_grid());
    Eigen::VectorXd beta = fit_penalized(x, penalty, lambda, y);

    Eigen::VectorXd fitted = x * beta;
    std::vector<double> residual(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) residual[static_cast<size_t>(i)] = target[i] - fitted[i];
    return residual;
}

}  // namespace loadcast
