#include <doctest.h>

#include <cmath>
#include <random>

#include "loadcast/aggregate.hpp"
#include "loadcast/timegrid.hpp"

using namespace loadcast;

TEST_CASE("single expert gets weight 1 forever") {
    ExpertPool pool({"only"});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(50, 5);
    for (int t = 0; t < 200; ++t) {
        double f = g(rng);
        CHECK(pool.weights()[0] == doctest::Approx(1.0));
        double agg = pool.step({f}, f + 0.1 * g(rng) - 50 * 0);
        CHECK(agg == doctest::Approx(f));
    }
}

TEST_CASE("identical experts stay uniform") {
    ExpertPool pool({"a", "b", "c"});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(50, 5);
    for (int t = 0; t < 100; ++t) {
        double f = g(rng);
        auto w = pool.weights();
        for (double x : w) CHECK(x == doctest::Approx(1.0 / 3.0));
        pool.step({f, f, f}, f + g(rng) * 0.2);
    }
}

TEST_CASE("perfect expert dominates and regret stays small") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 1);
    ExpertPool pool({"perfect", "bad"});
    double agg_loss = 0.0, best_loss = 0.0;
    std::vector<double> w_last;
    int T = 5000;
    for (int t = 0; t < T; ++t) {
        double y = 10.0 + g(rng) * 0;  // deterministic target
        double perfect = y;
        double bad = y + 1.0;
        w_last = pool.weights();
        double agg = pool.step({perfect, bad}, y);
        agg_loss += (agg - y) * (agg - y);
        best_loss += 0.0;
    }
    CHECK(w_last[0] > 0.99);
    // Cumulative aggregate loss within best + o(T).
    CHECK(agg_loss <= best_loss + 0.05 * T);
}

TEST_CASE("weights sum to one at every step and are causal") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0, 1);
    ExpertPool pool({"a", "b", "c", "d"});
    for (int t = 0; t < 500; ++t) {
        auto w = pool.weights();
        double sum = 0;
        for (double x : w) {
            CHECK(x >= 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        double y = g(rng);
        pool.step({y + g(rng), y + g(rng), y + 2 * g(rng), y - g(rng)}, y);
    }
}

TEST_CASE("permutation equivariance") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    ExpertPool p1({"a", "b", "c"});
    ExpertPool p2({"c", "a", "b"});
    for (int t = 0; t < 300; ++t) {
        double y = g(rng);
        double fa = y + g(rng), fb = y + 0.5 * g(rng), fc = y + 2.0 * g(rng);
        double agg1 = p1.step({fa, fb, fc}, y);
        double agg2 = p2.step({fc, fa, fb}, y);
        CHECK(agg1 == doctest::Approx(agg2).epsilon(1e-12));
        auto w1 = p1.weights();
        auto w2 = p2.weights();
        CHECK(w1[0] == doctest::Approx(w2[1]).epsilon(1e-12));
        CHECK(w1[1] == doctest::Approx(w2[2]).epsilon(1e-12));
        CHECK(w1[2] == doctest::Approx(w2[0]).epsilon(1e-12));
    }
}

TEST_CASE("bounded losses forbid weight jumps from dust to dominance") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 100.0);  // B = 100
    ExpertPool pool({"a", "b", "c"}, 100.0);
    std::vector<double> prev = pool.weights();
    for (int t = 0; t < 2000; ++t) {
        double y = u(rng);
        pool.step({u(rng), u(rng), u(rng)}, y);
        auto w = pool.weights();
        for (size_t i = 0; i < w.size(); ++i)
            if (prev[i] < 1e-6) CHECK(w[i] <= 0.5);
        prev = w;
    }
}

TEST_CASE("non-finite inputs are rejected") {
    ExpertPool pool({"a", "b"});
    CHECK_THROWS_AS(pool.step({1.0, std::nan("")}, 1.0), DataError);
    CHECK_THROWS_AS(pool.step({1.0, 2.0}, std::numeric_limits<double>::infinity()), DataError);
}

TEST_CASE("aggregate_run excludes missing experts with renormalization") {
    ExpertPool pool({"a", "b"});
    std::vector<std::vector<double>> experts{
        {10.0, 20.0}, {10.0, missing()}, {10.0, 20.0}, {missing(), missing()}, {10.0, 20.0}};
    std::vector<double> targets{15, 15, 15, 15, 15};
    AggregateRun run = aggregate_run(pool, experts, targets);
    REQUIRE(run.forecast.size() == 5);
    CHECK(run.forecast[1] == doctest::Approx(10.0));  // only expert a present
    CHECK(is_missing(run.forecast[3]));
    CHECK(run.skipped_expert_steps >= 1);
    // Weight rows sum to 1.
    for (int t : {0, 1, 2, 4}) {
        double sum = 0;
        for (double w : run.weights[t]) sum += w;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("four-expert drift scenario: the best chain wins the weight") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0, 1);
    ExpertPool pool({"gam", "static", "dynamic", "viking"});
    double level = 50.0;
    std::vector<double> mean_w(4, 0.0);
    int T = 3000;
    double agg_sse = 0;
    std::vector<double> expert_sse(4, 0.0);
    for (int t = 0; t < T; ++t) {
        level += 0.01;  // drift
        double y = level + 0.5 * g(rng);
        // gam is stale, static lags, dynamic tracks, viking close behind.
        std::vector<double> f{50.0, level - 2.0, level + 0.1 * g(rng),
                              level + 0.3 * g(rng)};
        auto w = pool.weights();
        for (int i = 0; i < 4; ++i) mean_w[i] += w[i] / T;
        double agg = pool.step(f, y);
        agg_sse += (agg - y) * (agg - y);
        for (int i = 0; i < 4; ++i) expert_sse[i] += (f[i] - y) * (f[i] - y);
    }
    CHECK(mean_w[2] > 0.5);
    CHECK(agg_sse <= 1.05 * *std::min_element(expert_sse.begin(), expert_sse.end()));
}
