#include <doctest.h>

#include <cmath>
#include <random>

#include "loadcast/select.hpp"
#include "loadcast/spline.hpp"

using namespace loadcast;

namespace {

// Brute force over all ordered 5-tuples of distinct indices. The kernel is
// the product of bracket differences whose expectation is the squared gap
// between the joint distribution and independence; the reported statistic
// carries the conventional factor of 30.
double hoeffding_quintuple_oracle(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    auto c = [](double u) { return u > 0.0 ? 1.0 : (u == 0.0 ? 0.5 : 0.0); };
    double acc = 0.0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) {
            if (i2 == i1) continue;
            for (int i3 = 0; i3 < n; ++i3) {
                if (i3 == i1 || i3 == i2) continue;
                for (int i4 = 0; i4 < n; ++i4) {
                    if (i4 == i1 || i4 == i2 || i4 == i3) continue;
                    for (int i5 = 0; i5 < n; ++i5) {
                        if (i5 == i1 || i5 == i2 || i5 == i3 || i5 == i4) continue;
                        double a1 = c(x[i1] - x[i5]) - c(x[i2] - x[i5]);
                        double a2 = c(x[i3] - x[i5]) - c(x[i4] - x[i5]);
                        double b1 = c(y[i1] - y[i5]) - c(y[i2] - y[i5]);
                        double b2 = c(y[i3] - y[i5]) - c(y[i4] - y[i5]);
                        acc += 0.25 * a1 * a2 * b1 * b2;
                    }
                }
            }
        }
    double nd = n;
    return 30.0 * acc / (nd * (nd - 1) * (nd - 2) * (nd - 3) * (nd - 4));
}

std::vector<double> linear_fit_predict(const Eigen::MatrixXd& x, const std::vector<double>& y) {
    Eigen::MatrixXd design(x.rows(), x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
    for (size_t i = 0; i < y.size(); ++i) yv[static_cast<Eigen::Index>(i)] = y[i];
    Eigen::VectorXd beta =
        (design.transpose() * design +
         1e-9 * Eigen::MatrixXd::Identity(design.cols(), design.cols()))
            .ldlt()
            .solve(design.transpose() * yv);
    Eigen::VectorXd pred = design * beta;
    return {pred.data(), pred.data() + pred.size()};
}

}  // namespace

TEST_CASE("mutual information") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    int n = 10000;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = u(rng);
        y[i] = u(rng);
    }

    SUBCASE("MI(x, x) is about log(bins)") {
        double mi = mutual_information(x, x, 8);
        CHECK(mi == doctest::Approx(std::log(8.0)).epsilon(0.10));
    }
    SUBCASE("independent uniforms give near-zero MI") {
        CHECK(mutual_information(x, y, 8) < 0.05);
    }
    SUBCASE("symmetry") {
        std::vector<double> z(n);
        for (int i = 0; i < n; ++i) z[i] = x[i] * x[i] + 0.3 * y[i];
        CHECK(mutual_information(x, z, 8) ==
              doctest::Approx(mutual_information(z, x, 8)).epsilon(1e-12));
    }
    SUBCASE("constant column flags degenerate and returns 0") {
        std::vector<double> c(n, 1.0);
        bool flag = false;
        CHECK(mutual_information(x, c, 8, &flag) == 0.0);
        CHECK(flag);
    }
    SUBCASE("too few samples per bin errors") {
        std::vector<double> small(50, 0.5);
        CHECK_THROWS_AS(mutual_information(small, small, 8), DataError);
    }
}

TEST_CASE("mrmr ranking") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    int n = 4000;
    std::vector<double> a(n), b(n), noise(n), target(n);
    for (int i = 0; i < n; ++i) {
        a[i] = g(rng);
        b[i] = g(rng);
        noise[i] = g(rng);
        target[i] = a[i] + 0.05 * g(rng);
    }

    SUBCASE("the copied feature comes first") {
        RankingReport r = mrmr_rank({noise, a, b}, {"noise", "a", "b"}, target, 3);
        CHECK(r.ranking[0].name == "a");
    }

    SUBCASE("a duplicate of the selected feature is penalized") {
        std::vector<double> a_dup(a);
        for (auto& v : a_dup) v += 0.01 * g(rng);
        // b carries independent signal on the target.
        std::vector<double> target2(n);
        for (int i = 0; i < n; ++i) target2[i] = a[i] + 0.8 * b[i] + 0.05 * g(rng);
        RankingReport r = mrmr_rank({a, a_dup, b}, {"a", "a_dup", "b"}, target2, 3);
        CHECK(r.ranking[0].name == "a");
        CHECK(r.ranking[1].name == "b");  // duplicate penalized behind b
    }

    SUBCASE("deterministic given column order") {
        RankingReport r1 = mrmr_rank({a, b, noise}, {"a", "b", "noise"}, target, 3);
        RankingReport r2 = mrmr_rank({a, b, noise}, {"a", "b", "noise"}, target, 3);
        for (size_t i = 0; i < r1.ranking.size(); ++i) {
            CHECK(r1.ranking[i].name == r2.ranking[i].name);
            CHECK(r1.ranking[i].score == r2.ranking[i].score);
        }
    }
}

TEST_CASE("hoeffding d against the quintuple oracle") {
    SUBCASE("seven-point hand dataset") {
        std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
        std::vector<double> y{2, 1, 4, 3, 7, 5, 6};
        CHECK(hoeffding_d(x, y) == doctest::Approx(hoeffding_quintuple_oracle(x, y)).epsilon(1e-10));
    }

    SUBCASE("tie-free random data, n = 20") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> x(20), y(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
        }
        CHECK(hoeffding_d(x, y) ==
              doctest::Approx(hoeffding_quintuple_oracle(x, y)).epsilon(1e-10));
    }

    SUBCASE("ties: mid-ranks track the half-count kernel closely") {
        std::mt19937_64 rng(3);
        std::uniform_int_distribution<int> d(0, 6);  // forces ties
        std::vector<double> x(20), y(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = d(rng);
            y[i] = d(rng);
        }
        CHECK(hoeffding_d(x, y) ==
              doctest::Approx(hoeffding_quintuple_oracle(x, y)).epsilon(0.15));
    }

    SUBCASE("independent uniforms give |D| < 0.01") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> x(10000), y(10000);
        for (int i = 0; i < 10000; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
        }
        CHECK(std::abs(hoeffding_d(x, y)) < 0.01);
    }

    SUBCASE("strictly monotone dependence is near 1") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> x(500), y(500);
        for (int i = 0; i < 500; ++i) {
            x[i] = u(rng);
            y[i] = std::exp(2.0 * x[i]);
        }
        CHECK(hoeffding_d(x, y) == doctest::Approx(1.0).epsilon(0.02));
    }

    SUBCASE("rank-transform invariance (exactly rank-based)") {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> g;
        std::vector<double> x(60), y(60), xt(60), yt(60);
        for (int i = 0; i < 60; ++i) {
            x[i] = g(rng);
            y[i] = x[i] * x[i] + 0.5 * g(rng);
            xt[i] = std::atan(x[i]);        // strictly increasing transforms
            yt[i] = std::exp(0.5 * y[i]);
        }
        CHECK(hoeffding_d(x, y) == doctest::Approx(hoeffding_d(xt, yt)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(hoeffding_d({1, 2, 3, 4}, {1, 2, 3, 4}), DataError);
}

TEST_CASE("shapley importance") {
    std::mt19937_64 data_rng(7);
    std::normal_distribution<double> g;
    int n = 600;
    std::vector<double> a(n), b(n), c(n), target(n);
    for (int i = 0; i < n; ++i) {
        a[i] = g(data_rng);
        b[i] = g(data_rng);
        c[i] = g(data_rng);
    }

    SUBCASE("single informative feature takes the full value") {
        for (int i = 0; i < n; ++i) target[i] = 2.0 * a[i] + 0.01 * g(data_rng);
        std::mt19937_64 rng(8);
        RankingReport r = shapley_importance(linear_fit_predict, {a, b, c}, {"a", "b", "c"},
                                             target, 64, rng);
        CHECK(r.ranking[0].name == "a");
        CHECK(r.ranking[0].score > 0.95);
        for (size_t i = 1; i < r.ranking.size(); ++i) CHECK(std::abs(r.ranking[i].score) < 0.02);
    }

    SUBCASE("duplicated features share the value symmetrically") {
        std::vector<double> a2(a);
        for (int i = 0; i < n; ++i) target[i] = a[i] + 0.05 * g(data_rng);
        std::mt19937_64 rng(9);
        RankingReport r = shapley_importance(linear_fit_predict, {a, a2, b}, {"a", "a2", "b"},
                                             target, 128, rng);
        double va = 0, va2 = 0, sa = 0, sa2 = 0;
        for (const auto& f : r.ranking) {
            if (f.name == "a") {
                va = f.score;
                sa = f.std_error;
            }
            if (f.name == "a2") {
                va2 = f.score;
                sa2 = f.std_error;
            }
        }
        CHECK(std::abs(va - va2) < 2.0 * std::sqrt(sa * sa + sa2 * sa2) + 1e-9);
    }

    SUBCASE("efficiency: values sum to the full-model R^2") {
        for (int i = 0; i < n; ++i) target[i] = a[i] + 0.5 * b[i] + 0.3 * g(data_rng);
        std::mt19937_64 rng(10);
        RankingReport r = shapley_importance(linear_fit_predict, {a, b, c}, {"a", "b", "c"},
                                             target, 64, rng);
        double sum = 0;
        for (const auto& f : r.ranking) sum += f.score;
        // The permutation estimator telescopes exactly.
        std::vector<double> pred = linear_fit_predict(
            [&] {
                Eigen::MatrixXd x(n, 3);
                for (int i = 0; i < n; ++i) {
                    x(i, 0) = a[i];
                    x(i, 1) = b[i];
                    x(i, 2) = c[i];
                }
                return x;
            }(),
            target);
        double ym = 0, sst = 0, sse = 0;
        for (double v : target) ym += v;
        ym /= n;
        for (int i = 0; i < n; ++i) {
            sst += (target[i] - ym) * (target[i] - ym);
            sse += (target[i] - pred[i]) * (target[i] - pred[i]);
        }
        CHECK(sum == doctest::Approx(1.0 - sse / sst).epsilon(1e-9));
    }

    SUBCASE("degenerate target flags zeros") {
        std::vector<double> flat(n);
        for (int i = 0; i < n; ++i) flat[i] = g(data_rng);  // unrelated target
        // A fitter that ignores features entirely gives R^2 <= 0.
        ModelFitter mean_fitter = [](const Eigen::MatrixXd&, const std::vector<double>& y) {
            double m = 0;
            for (double v : y) m += v;
            m /= static_cast<double>(y.size());
            return std::vector<double>(y.size(), m);
        };
        std::mt19937_64 rng(11);
        RankingReport r =
            shapley_importance(mean_fitter, {a, b}, {"a", "b"}, flat, 64, rng);
        CHECK(r.degenerate);
        for (const auto& f : r.ranking) CHECK(f.score == 0.0);
    }
}

TEST_CASE("correct_for removes a feature's effect") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(-2, 2);
    int n = 2000;
    std::vector<double> temp(n), work(n), target(n);
    for (int i = 0; i < n; ++i) {
        temp[i] = u(rng);
        work[i] = g(rng);
        target[i] = 4.0 * std::cos(temp[i]) + 0.02 * g(rng);  // purely temperature-driven
    }

    SUBCASE("remove nothing is the identity") {
        auto out = correct_for({temp, work}, {"temp", "work"}, target, {});
        CHECK(out == target);
    }

    SUBCASE("removing the true driver leaves noise") {
        auto resid = correct_for({temp, work}, {"temp", "work"}, target, {"temp"});
        CHECK(mutual_information(temp, resid, 8) < 0.05);
        double var = 0, mean = 0;
        for (double v : resid) mean += v;
        mean /= n;
        for (double v : resid) var += (v - mean) * (v - mean);
        CHECK(std::sqrt(var / n) < 0.1);
    }

    SUBCASE("work's rank rises after temperature correction") {
        // Load driven mostly by temperature plus a small work effect.
        std::vector<double> load(n);
        for (int i = 0; i < n; ++i)
            load[i] = 5.0 * std::cos(temp[i]) + 0.8 * work[i] + 0.1 * g(rng);
        double before = hoeffding_d(work, load);
        auto corrected = correct_for({temp, work}, {"temp", "work"}, load, {"temp"});
        double after = hoeffding_d(work, corrected);
        CHECK(after > before);
    }
}

TEST_CASE("monotone transforms preserve the top of the ranking") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    int n = 3000;
    std::vector<double> strong(n), medium(n), weak(n), target(n);
    for (int i = 0; i < n; ++i) {
        strong[i] = g(rng);
        medium[i] = g(rng);
        weak[i] = g(rng);
        target[i] = 2.0 * strong[i] + 0.8 * medium[i] + 0.1 * weak[i] + 0.2 * g(rng);
    }
    auto transform = [](const std::vector<double>& v, int which) {
        std::vector<double> out(v.size());
        for (size_t i = 0; i < v.size(); ++i)
            out[i] = which == 0 ? std::exp(v[i]) : (which == 1 ? std::atan(v[i]) : v[i] * 3 + 1);
        return out;
    };

    RankingReport h1 = hoeffding_rank({strong, medium, weak}, {"s", "m", "w"}, target);
    RankingReport h2 = hoeffding_rank(
        {transform(strong, 0), transform(medium, 1), transform(weak, 2)}, {"s", "m", "w"},
        target);
    REQUIRE(h1.ranking.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(h1.ranking[i].name == h2.ranking[i].name);
        CHECK(h1.ranking[i].score == doctest::Approx(h2.ranking[i].score).epsilon(1e-12));
    }

    RankingReport m1 = mrmr_rank({strong, medium, weak}, {"s", "m", "w"}, target, 3);
    RankingReport m2 =
        mrmr_rank({transform(strong, 0), transform(medium, 1), transform(weak, 2)},
                  {"s", "m", "w"}, target, 3);
    CHECK(m1.ranking[0].name == m2.ranking[0].name);
    CHECK(m1.ranking[1].name == m2.ranking[1].name);
}
