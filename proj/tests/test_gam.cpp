#include <doctest.h>

#include <cmath>
#include <random>

#include "loadcast/gam.hpp"
#include "loadcast/metrics.hpp"
#include "loadcast/serialize.hpp"

using namespace loadcast;

TEST_CASE("parse_formula") {
    SUBCASE("paper-style formula") {
        Formula f = parse_formula("load ~ daytype:dls + s(toy, k=20, cyclic) + s(temp95, k=5)");
        CHECK(f.response == "load");
        REQUIRE(f.terms.size() == 3);
        CHECK(std::holds_alternative<CatInteraction>(f.terms[0]));
        auto& toy = std::get<SmoothTerm>(f.terms[1]);
        CHECK(toy.k == 20);
        CHECK(toy.cyclic);
        CHECK(!std::get<SmoothTerm>(f.terms[2]).cyclic);
    }

    SUBCASE("intercept-only") {
        Formula f = parse_formula("load ~ 1");
        CHECK(f.terms.empty());
    }

    SUBCASE("errors carry a position") {
        CHECK_THROWS_WITH_AS(parse_formula("load ~ s(x, k=2)"),
                             doctest::Contains("k below minimum"), DataError);
        CHECK_THROWS_WITH_AS(parse_formula("load ~ q(x, k=4)"), doctest::Contains("position"),
                             DataError);
        CHECK_THROWS_AS(parse_formula("load ~ temp + temp"), DataError);
        CHECK_THROWS_AS(parse_formula("load ~"), DataError);
    }

    SUBCASE("round-trips through the canonical printer") {
        const char* texts[] = {
            "load ~ daytype:dls + s(toy, k=20, cyclic) + te(tempmin99, tempmax99, k=4)",
            "err ~ s(work, k=5) + lagterm(load1d, by=daytype) + load1w",
            "load ~ 1",
        };
        for (const char* t : texts) {
            Formula f = parse_formula(t);
            CHECK(print_formula(parse_formula(print_formula(f))) == print_formula(f));
        }
    }
}

namespace {

// Half-hourly design with known additive structure on a short horizon.
struct SynthGam {
    SeriesFrame design;
    std::vector<double> g1;  // true toy effect at each row
    std::vector<double> g2;  // true temp effect
    double noise_sd;
};

SynthGam make_gam_data(int days, uint64_t seed, double noise_sd) {
    int64_t t0 = parse_timestamp("2020-01-01");
    TimeGrid grid(t0, kStepHalfHour, days * 48LL);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, noise_sd);

    SynthGam out;
    out.noise_sd = noise_sd;
    std::vector<double> load(grid.count()), temp(grid.count()), toy(grid.count()),
        daytype(grid.count()), dls(grid.count()), halfhour(grid.count());
    out.g1.resize(grid.count());
    out.g2.resize(grid.count());
    for (int64_t k = 0; k < grid.count(); ++k) {
        int64_t t = grid.at(k);
        double ty = static_cast<double>(k % (365 * 48)) / (365.0 * 48.0);
        // Kept independent of toy so the additive decomposition is identified.
        double tmp = 12.0 + 6.0 * std::sin(0.0131 * static_cast<double>(k)) + 2.0 * g(rng) / (noise_sd > 0 ? noise_sd : 1.0) * 0.15;
        double effect1 = 4.0 * std::sin(2 * M_PI * ty);
        double effect2 = 0.08 * (tmp - 12.0) * (tmp - 12.0);
        toy[k] = ty;
        temp[k] = tmp;
        out.g1[k] = effect1;
        out.g2[k] = effect2;
        daytype[k] = weekday_1to7(t);
        dls[k] = daylight_saving_flag(t) ? 1.0 : 0.0;
        halfhour[k] = static_cast<double>((t % kStepDay) / kStepHalfHour);
        load[k] = 50.0 + effect1 + effect2 + g(rng);
    }
    out.design = SeriesFrame(grid);
    out.design.add_column("load", std::move(load));
    out.design.add_column("temp", std::move(temp));
    out.design.add_column("toy", std::move(toy));
    out.design.add_column("daytype", std::move(daytype));
    out.design.add_column("dls", std::move(dls));
    out.design.add_column("halfhour", std::move(halfhour));
    return out;
}

GamFitOptions loose_opts(int min_rows = 3) {
    GamFitOptions opts;
    opts.min_rows_per_dim = min_rows;
    opts.n_threads = 2;
    return opts;
}

}  // namespace

TEST_CASE("fit_gam_bank recovers additive effects") {
    SynthGam data = make_gam_data(400, 21, 0.3);
    Formula f = parse_formula("load ~ s(toy, k=8) + s(temp, k=6)");
    GamBank bank = fit_gam_bank(data.design, f, data.design.grid().start(),
                                data.design.grid().end(), loose_opts(10));
    REQUIRE(bank.models.size() == 48);

    GamPrediction pred = predict_gam(bank, data.design);

    // Recovered effect RMSE < 3 sigma / sqrt(n_per_halfhour) plus a small
    // approximation-bias allowance.
    double bound = 3.0 * data.noise_sd / std::sqrt(400.0) + 0.05;
    std::vector<double> e1, t1, e2, t2;
    for (int64_t k = 0; k < data.design.rows(); ++k) {
        e1.push_back(pred.effects(k, 0));
        e2.push_back(pred.effects(k, 1));
        t1.push_back(data.g1[k]);
        t2.push_back(data.g2[k]);
    }
    // Effects are identified up to a constant: compare after centering both.
    auto centered_rmse = [](std::vector<double> a, std::vector<double> b) {
        double ma = 0, mb = 0;
        for (double v : a) ma += v;
        for (double v : b) mb += v;
        ma /= a.size();
        mb /= b.size();
        double acc = 0;
        for (size_t i = 0; i < a.size(); ++i) {
            double d = (a[i] - ma) - (b[i] - mb);
            acc += d * d;
        }
        return std::sqrt(acc / a.size());
    };
    CHECK(centered_rmse(e1, t1) < bound);
    CHECK(centered_rmse(e2, t2) < bound);

    SUBCASE("sum of effects equals the prediction") {
        for (int64_t k = 0; k < 500; k += 7) {
            int hh = static_cast<int>(data.design.column("halfhour")[k]);
            double total = bank.models[hh].coef[0];
            for (Eigen::Index j = 0; j < pred.effects.cols(); ++j) total += pred.effects(k, j);
            CHECK(pred.forecast[k] == doctest::Approx(total).epsilon(1e-10));
        }
    }

    SUBCASE("training-set residual mean is about zero (centering)") {
        double acc = 0;
        int64_t n = 0;
        const auto& load = data.design.column("load");
        for (int64_t k = 0; k < data.design.rows(); ++k) {
            acc += load[k] - pred.forecast[k];
            ++n;
        }
        CHECK(std::abs(acc / static_cast<double>(n)) < 1e-6);
    }

    SUBCASE("smooth effects are centered over training rows") {
        for (int hh : {0, 13, 47}) {
            const GamModel& m = bank.models[hh];
            double acc0 = 0, acc1 = 0;
            int64_t n = 0;
            for (int64_t k = 0; k < data.design.rows(); ++k) {
                if (static_cast<int>(data.design.column("halfhour")[k]) != hh) continue;
                acc0 += pred.effects(k, 0);
                acc1 += pred.effects(k, 1);
                ++n;
            }
            CHECK(std::abs(acc0) / static_cast<double>(n) < 1e-8);
            CHECK(std::abs(acc1) / static_cast<double>(n) < 1e-8);
            CHECK(m.n_train == n);
        }
    }
}

TEST_CASE("intercept-only bank predicts half-hour means") {
    SynthGam data = make_gam_data(40, 22, 0.2);
    GamBank bank = fit_gam_bank(data.design, parse_formula("load ~ 1"),
                                data.design.grid().start(), data.design.grid().end(),
                                loose_opts(10));
    const auto& load = data.design.column("load");
    const auto& hh = data.design.column("halfhour");
    for (int h : {0, 5, 47}) {
        double mean = 0;
        int64_t n = 0;
        for (int64_t k = 0; k < data.design.rows(); ++k)
            if (static_cast<int>(hh[k]) == h) {
                mean += load[k];
                ++n;
            }
        mean /= static_cast<double>(n);
        CHECK(bank.models[h].coef[0] == doctest::Approx(mean).epsilon(1e-10));
    }
}

TEST_CASE("row order does not change coefficients") {
    SynthGam data = make_gam_data(120, 23, 0.2);
    Formula f = parse_formula("load ~ s(toy, k=6) + daytype:dls");
    auto rows = eligible_rows(data.design, f, data.design.grid().start(),
                              data.design.grid().end(), 10);
    GamFitOptions opts = loose_opts(3);
    GamModel a = fit_gam_model(data.design, f, rows, 10, opts);
    std::mt19937_64 rng(99);
    std::shuffle(rows.begin(), rows.end(), rng);
    GamModel b = fit_gam_model(data.design, f, rows, 10, opts);
    CHECK((a.coef - b.coef).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("insufficient rows error names the half-hour") {
    SynthGam data = make_gam_data(10, 24, 0.2);
    Formula f = parse_formula("load ~ s(toy, k=8) + s(temp, k=8)");
    CHECK_THROWS_WITH_AS(fit_gam_bank(data.design, f, data.design.grid().start(),
                                      data.design.grid().end()),
                         doctest::Contains("half-hour"), DataError);
}

TEST_CASE("prediction on a missing column errors, missing values give NaN") {
    SynthGam data = make_gam_data(60, 25, 0.2);
    Formula f = parse_formula("load ~ s(temp, k=5)");
    GamBank bank = fit_gam_bank(data.design, f, data.design.grid().start(),
                                data.design.grid().end(), loose_opts());

    SeriesFrame partial(data.design.grid());
    partial.add_column("halfhour", data.design.column("halfhour"));
    CHECK_THROWS_AS(predict_gam(bank, partial), DataError);

    SeriesFrame holed = data.design;
    auto temp = holed.column("temp");
    temp[5] = missing();
    holed.set_column("temp", temp);
    GamPrediction pred = predict_gam(bank, holed);
    CHECK(is_missing(pred.forecast[5]));
    CHECK(!is_missing(pred.forecast[6]));
}

TEST_CASE("extrapolated inputs are clamped and counted") {
    SynthGam data = make_gam_data(90, 26, 0.1);
    Formula f = parse_formula("load ~ s(temp, k=5)");
    GamBank bank = fit_gam_bank(data.design, f, data.design.grid().start(),
                                data.design.grid().end(), loose_opts());
    SeriesFrame hot = data.design;
    auto temp = hot.column("temp");
    temp[0] = 99.0;  // far beyond the training range
    hot.set_column("temp", temp);
    GamPrediction pred = predict_gam(bank, hot);
    CHECK(pred.n_clamped > 0);
    CHECK(!is_missing(pred.forecast[0]));
}

TEST_CASE("cross-half-hour independence") {
    SynthGam data = make_gam_data(180, 27, 0.2);
    Formula f = parse_formula("load ~ s(toy, k=6)");
    GamBank a = fit_gam_bank(data.design, f, data.design.grid().start(),
                             data.design.grid().end(), loose_opts());

    // Corrupt the load at every row of half-hour 7; other models must not move.
    SeriesFrame corrupted = data.design;
    auto load = corrupted.column("load");
    const auto& hh = corrupted.column("halfhour");
    for (int64_t k = 0; k < corrupted.rows(); ++k)
        if (static_cast<int>(hh[k]) == 7) load[k] += 25.0;
    corrupted.set_column("load", load);
    GamBank b = fit_gam_bank(corrupted, f, data.design.grid().start(),
                             data.design.grid().end(), loose_opts());
    for (int h = 0; h < 48; ++h) {
        double diff = (a.models[h].coef - b.models[h].coef).cwiseAbs().maxCoeff();
        if (h == 7)
            CHECK(diff > 1.0);
        else
            CHECK(diff < 1e-10);
    }
}

TEST_CASE("gam bank serialization round-trip") {
    SynthGam data = make_gam_data(100, 28, 0.2);
    Formula f = parse_formula("load ~ daytype:dls + s(toy, k=6) + s(temp, k=5)");
    GamBank bank = fit_gam_bank(data.design, f, data.design.grid().start(),
                                data.design.grid().end(), loose_opts());
    save_gam_bank("test_bank.bin", bank);
    GamBank back = load_gam_bank("test_bank.bin");
    CHECK(print_formula(back.formula) == print_formula(bank.formula));
    GamPrediction p1 = predict_gam(bank, data.design);
    GamPrediction p2 = predict_gam(back, data.design);
    for (int64_t k = 0; k < data.design.rows(); k += 97)
        CHECK(p1.forecast[k] == doctest::Approx(p2.forecast[k]).epsilon(1e-14));
    std::remove("test_bank.bin");
}

TEST_CASE("seasonality formula excludes trend and lags") {
    Formula f = seasonality_formula();
    for (const auto& var : formula_variables(f)) {
        CHECK(var != "trend");
        CHECK(var != "load1d");
        CHECK(var != "load1w");
    }
}
