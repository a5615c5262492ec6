#include "loadcast/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loadcast {

std::vector<int64_t> ChangePointReport::sorted_indices() const {
    std::vector<int64_t> idx;
    idx.reserve(points.size());
    for (const auto& p : points) idx.push_back(p.index);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

struct PrefixSums {
    std::vector<double> s1;  // s1[i] = sum of series[0..i)
    std::vector<double> s2;

    explicit PrefixSums(const std::vector<double>& x) {
        s1.resize(x.size() + 1, 0.0);
        s2.resize(x.size() + 1, 0.0);
        for (size_t i = 0; i < x.size(); ++i) {
            s1[i + 1] = s1[i] + x[i];
            s2[i + 1] = s2[i] + x[i] * x[i];
        }
    }

    double sum(int64_t lo, int64_t hi) const { return s1[hi] - s1[lo]; }
    double mean(int64_t lo, int64_t hi) const {
        return sum(lo, hi) / static_cast<double>(hi - lo);
    }
    // Sum of squared deviations from the segment mean over [lo, hi).
    double cost(int64_t lo, int64_t hi) const {
        double s = sum(lo, hi);
        return (s2[hi] - s2[lo]) - s * s / static_cast<double>(hi - lo);
    }
};

struct Segment {
    int64_t lo = 0, hi = 0;
    int64_t best_split = -1;
    double best_reduction = 0.0;
};

void find_best(Segment& seg, const PrefixSums& ps, int64_t min_seg) {
    seg.best_split = -1;
    seg.best_reduction = 0.0;
    double parent = ps.cost(seg.lo, seg.hi);
    for (int64_t s = seg.lo + min_seg; s + min_seg <= seg.hi; ++s) {
        double reduction = parent - ps.cost(seg.lo, s) - ps.cost(s, seg.hi);
        if (reduction > seg.best_reduction + 1e-12 * (1.0 + seg.best_reduction)) {
            seg.best_reduction = reduction;
            seg.best_split = s;
        }
    }
}

}  // namespace

ChangePointReport binseg(const std::vector<double>& series, int max_cp, int64_t min_seg) {
    if (max_cp < 1) throw DataError("binseg needs max_cp >= 1");
    if (min_seg < 1) throw DataError("binseg needs min_seg >= 1");
    const auto n = static_cast<int64_t>(series.size());
    if (n < 2 * min_seg)
        throw DataError("series of length " + std::to_string(n) +
                        " is shorter than two minimum segments (" + std::to_string(2 * min_seg) +
                        ")");

    PrefixSums ps(series);
    std::vector<Segment> segments;
    segments.push_back({0, n});
    find_best(segments[0], ps, min_seg);

    ChangePointReport report;
    for (int round = 0; round < max_cp; ++round) {
        int pick = -1;
        double best = 0.0;
        for (size_t i = 0; i < segments.size(); ++i) {
            if (segments[i].best_split < 0) continue;
            if (segments[i].best_reduction > best) {
                best = segments[i].best_reduction;
                pick = static_cast<int>(i);
            }
        }
        if (pick < 0) break;

        Segment seg = segments[static_cast<size_t>(pick)];
        ChangePoint cp;
        cp.index = seg.best_split;
        cp.cost_reduction = seg.best_reduction;
        cp.rank = round + 1;
        cp.left_mean = ps.mean(seg.lo, seg.best_split);
        cp.right_mean = ps.mean(seg.best_split, seg.hi);
        report.points.push_back(cp);
        report.total_cost_reduction += seg.best_reduction;

        Segment left{seg.lo, seg.best_split};
        Segment right{seg.best_split, seg.hi};
        find_best(left, ps, min_seg);
        find_best(right, ps, min_seg);
        segments[static_cast<size_t>(pick)] = left;
        segments.push_back(right);
    }
    return report;
}

std::vector<double> segment_means(const std::vector<double>& series,
                                  const std::vector<int64_t>& change_points) {
    std::vector<int64_t> bounds{0};
    for (int64_t c : change_points) bounds.push_back(c);
    bounds.push_back(static_cast<int64_t>(series.size()));
    std::sort(bounds.begin(), bounds.end());

    std::vector<double> out(series.size(), 0.0);
    for (size_t b = 0; b + 1 < bounds.size(); ++b) {
        int64_t lo = bounds[b], hi = bounds[b + 1];
        if (lo >= hi) continue;
        double mean = 0.0;
        for (int64_t i = lo; i < hi; ++i) mean += series[i];
        mean /= static_cast<double>(hi - lo);
        for (int64_t i = lo; i < hi; ++i) out[i] = mean;
    }
    return out;
}

ChangePointReport significance_filter(const ChangePointReport& report, double residual_sd,
                                      double kappa) {
    ChangePointReport out;
    for (const auto& p : report.points) {
        if (std::abs(p.jump()) < kappa * residual_sd) break;
        out.points.push_back(p);
        out.total_cost_reduction += p.cost_reduction;
    }
    return out;
}

ResidualDiagnostics residual_diagnostics(const std::vector<double>& residuals, int max_lag) {
    const auto n = static_cast<int64_t>(residuals.size());
    if (n < 30) throw DataError("diagnostics need at least 30 points");

    ResidualDiagnostics d;
    for (double v : residuals) d.mean += v;
    d.mean /= static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : residuals) {
        double c = v - d.mean;
        m2 += c * c;
        m3 += c * c * c;
        m4 += c * c * c * c;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    d.sd = std::sqrt(m2);
    if (m2 <= 0.0) {
        d.degenerate = true;
        d.acf.assign(static_cast<size_t>(max_lag), 0.0);
        d.ljung_box_lags = max_lag;
        return d;
    }
    d.skew = m3 / (d.sd * d.sd * d.sd);
    d.kurtosis = m4 / (m2 * m2) - 3.0;
    double sample_sd = std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1));
    d.t_stat = d.mean / (sample_sd / std::sqrt(static_cast<double>(n)));

    d.acf.resize(static_cast<size_t>(max_lag), 0.0);
    for (int k = 1; k <= max_lag && k < n; ++k) {
        double acc = 0.0;
        for (int64_t t = k; t < n; ++t)
            acc += (residuals[t] - d.mean) * (residuals[t - k] - d.mean);
        d.acf[static_cast<size_t>(k - 1)] = acc / (m2 * static_cast<double>(n));
    }

    d.ljung_box_lags = max_lag;
    double q = 0.0;
    for (int k = 1; k <= max_lag && k < n; ++k) {
        double rho = d.acf[static_cast<size_t>(k - 1)];
        q += rho * rho / static_cast<double>(n - k);
    }
    d.ljung_box = static_cast<double>(n) * (static_cast<double>(n) + 2.0) * q;
    return d;
}

double savings_percent(const std::vector<double>& residuals, const std::vector<double>& loads_hat,
                       SavingsKind kind) {
    if (residuals.size() != loads_hat.size() || residuals.empty())
        throw DataError("savings: mismatched or empty inputs");
    if (kind == SavingsKind::RatioOfMeans) {
        double rsum = 0.0, lsum = 0.0;
        for (size_t i = 0; i < residuals.size(); ++i) {
            rsum += residuals[i];
            lsum += loads_hat[i];
        }
        if (std::abs(lsum) < 1e-9) throw NumericError("savings: near-zero mean predicted load");
        return 100.0 * rsum / lsum;
    }
    double acc = 0.0;
    for (size_t i = 0; i < residuals.size(); ++i) {
        if (std::abs(loads_hat[i]) < 1e-9)
            throw NumericError("savings: near-zero predicted load at index " + std::to_string(i));
        acc += residuals[i] / loads_hat[i];
    }
    return 100.0 * acc / static_cast<double>(residuals.size());
}

}  // namespace loadcast
