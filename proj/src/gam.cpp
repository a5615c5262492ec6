#include "loadcast/gam.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>
#include <thread>

#include "loadcast/metrics.hpp"

namespace loadcast {

namespace {

int effective_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(int n_jobs, int n_threads, const std::function<void(int)>& body) {
    if (n_threads <= 1 || n_jobs <= 1) {
        for (int j = 0; j < n_jobs; ++j) body(j);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1)) body(j);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<double> gather(const std::vector<double>& col, const std::vector<int64_t>& rows) {
    std::vector<double> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = col[rows[i]];
    return out;
}

}  // namespace

FittedTerm init_fitted_term(const FormulaTerm& spec, const SeriesFrame& design,
                            const std::vector<int64_t>& rows, const GamFitOptions& opts) {
    FittedTerm t;
    t.spec = spec;
    t.label = term_label(spec);

    if (const auto* lin = std::get_if<LinearTerm>(&spec)) {
        design.column(lin->var);  // existence check
        t.col_count = 1;
    } else if (const auto* cat = std::get_if<CatInteraction>(&spec)) {
        const auto& a = design.column(cat->a);
        const auto& b = design.column(cat->b);
        std::set<std::pair<int, int>> levels;
        for (int64_t r : rows)
            levels.emplace(static_cast<int>(std::lround(a[r])),
                           static_cast<int>(std::lround(b[r])));
        if (levels.size() < 2)
            throw DataError("interaction " + t.label + " has a single level in training data");
        t.cat_levels.assign(std::next(levels.begin()), levels.end());  // first level dropped
        t.col_count = static_cast<int>(t.cat_levels.size());
    } else if (const auto* sm = std::get_if<SmoothTerm>(&spec)) {
        auto x = gather(design.column(sm->var), rows);
        auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        if (!(*lo < *hi)) throw DataError("smooth variable '" + sm->var + "' is constant");
        t.basis1 = sm->cyclic ? SplineBasis::cyclic(*lo, *hi, sm->k)
                              : SplineBasis::uniform(*lo, *hi, sm->k);
        t.penalized = true;
        t.lambda = 1.0;
        t.col_count = t.basis1.dim();
    } else if (const auto* te = std::get_if<TensorTerm>(&spec)) {
        auto x1 = gather(design.column(te->var1), rows);
        auto x2 = gather(design.column(te->var2), rows);
        auto [lo1, hi1] = std::minmax_element(x1.begin(), x1.end());
        auto [lo2, hi2] = std::minmax_element(x2.begin(), x2.end());
        if (!(*lo1 < *hi1) || !(*lo2 < *hi2))
            throw DataError("tensor variables of " + t.label + " must be non-constant");
        int dim1;
        if (te->var1 == opts.linear_tensor_var) {
            t.linear_marginal1 = true;
            t.lin_scale_a = *lo1;
            t.lin_scale_b = *hi1;
            dim1 = 2;
        } else {
            t.basis1 = SplineBasis::uniform(*lo1, *hi1, te->k);
            dim1 = t.basis1.dim();
        }
        t.basis2 = SplineBasis::uniform(*lo2, *hi2, te->k);
        t.penalized = true;
        t.lambda = 1.0;
        t.col_count = dim1 * t.basis2.dim();
    } else if (const auto* bl = std::get_if<ByLagTerm>(&spec)) {
        design.column(bl->var);
        const auto& by = design.column(bl->by);
        std::set<int> levels;
        for (int64_t r : rows) levels.insert(static_cast<int>(std::lround(by[r])));
        t.by_levels.assign(levels.begin(), levels.end());
        t.col_count = static_cast<int>(t.by_levels.size());
    }
    return t;
}

Eigen::MatrixXd term_design(const FittedTerm& term, const SeriesFrame& design,
                            const std::vector<int64_t>& rows, int64_t* n_clamped) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd block;

    if (const auto* lin = std::get_if<LinearTerm>(&term.spec)) {
        const auto& col = design.column(lin->var);
        block.resize(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) block(i, 0) = col[rows[i]];
    } else if (const auto* cat = std::get_if<CatInteraction>(&term.spec)) {
        const auto& a = design.column(cat->a);
        const auto& b = design.column(cat->b);
        block = Eigen::MatrixXd::Zero(n, term.col_count);
        for (Eigen::Index i = 0; i < n; ++i) {
            std::pair<int, int> level{static_cast<int>(std::lround(a[rows[i]])),
                                      static_cast<int>(std::lround(b[rows[i]]))};
            auto it = std::find(term.cat_levels.begin(), term.cat_levels.end(), level);
            if (it != term.cat_levels.end())
                block(i, static_cast<Eigen::Index>(it - term.cat_levels.begin())) = 1.0;
        }
    } else if (const auto* sm = std::get_if<SmoothTerm>(&term.spec)) {
        block = bspline_design(gather(design.column(sm->var), rows), term.basis1, n_clamped);
    } else if (const auto* te = std::get_if<TensorTerm>(&term.spec)) {
        Eigen::MatrixXd m1;
        if (term.linear_marginal1) {
            const auto& col = design.column(te->var1);
            m1.resize(n, 2);
            double span = term.lin_scale_b - term.lin_scale_a;
            for (Eigen::Index i = 0; i < n; ++i) {
                m1(i, 0) = 1.0;
                m1(i, 1) = (col[rows[i]] - term.lin_scale_a) / span;
            }
        } else {
            m1 = bspline_design(gather(design.column(te->var1), rows), term.basis1, n_clamped);
        }
        Eigen::MatrixXd m2 =
            bspline_design(gather(design.column(te->var2), rows), term.basis2, n_clamped);
        block.resize(n, m1.cols() * m2.cols());
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index c1 = 0; c1 < m1.cols(); ++c1)
                for (Eigen::Index c2 = 0; c2 < m2.cols(); ++c2)
                    block(i, c1 * m2.cols() + c2) = m1(i, c1) * m2(i, c2);
    } else if (const auto* bl = std::get_if<ByLagTerm>(&term.spec)) {
        const auto& x = design.column(bl->var);
        const auto& by = design.column(bl->by);
        block = Eigen::MatrixXd::Zero(n, term.col_count);
        for (Eigen::Index i = 0; i < n; ++i) {
            int level = static_cast<int>(std::lround(by[rows[i]]));
            auto it = std::find(term.by_levels.begin(), term.by_levels.end(), level);
            if (it != term.by_levels.end())
                block(i, static_cast<Eigen::Index>(it - term.by_levels.begin())) = x[rows[i]];
        }
    }

    if (!term.centering.empty())
        for (Eigen::Index c = 0; c < block.cols(); ++c)
            block.col(c).array() -= term.centering[static_cast<size_t>(c)];
    return block;
}

Eigen::MatrixXd term_penalty(const FittedTerm& term) {
    if (const auto* sm = std::get_if<SmoothTerm>(&term.spec)) {
        return second_difference_penalty(term.basis1.dim(), sm->cyclic);
    }
    if (std::get_if<TensorTerm>(&term.spec)) {
        int dim1 = term.linear_marginal1 ? 2 : term.basis1.dim();
        int dim2 = term.basis2.dim();
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim1 * dim2, dim1 * dim2);
        // Marginal roughness penalties, additive over the two directions.
        Eigen::MatrixXd p2 = second_difference_penalty(dim2, false);
        for (int i = 0; i < dim1; ++i)
            p.block(i * dim2, i * dim2, dim2, dim2) += p2;
        if (!term.linear_marginal1) {
            Eigen::MatrixXd p1 = second_difference_penalty(dim1, false);
            for (int r = 0; r < dim1; ++r)
                for (int c = 0; c < dim1; ++c)
                    for (int j = 0; j < dim2; ++j) p(r * dim2 + j, c * dim2 + j) += p1(r, c);
        }
        return p;
    }
    return Eigen::MatrixXd::Zero(term.col_count, term.col_count);
}

std::vector<int64_t> eligible_rows(const SeriesFrame& design, const Formula& formula,
                                   int64_t window_start, int64_t window_end, int half_hour) {
    const auto& hh = design.column(col::kHalfHour);
    std::vector<const std::vector<double>*> cols;
    for (const auto& var : formula_variables(formula)) cols.push_back(&design.column(var));
    cols.push_back(&design.column(formula.response));

    std::vector<int64_t> rows;
    for (int64_t k = 0; k < design.rows(); ++k) {
        int64_t t = design.grid().at(k);
        if (t < window_start || t >= window_end) continue;
        if (static_cast<int>(hh[k]) != half_hour) continue;
        bool ok = true;
        for (const auto* c : cols)
            if (is_missing((*c)[k])) {
                ok = false;
                break;
            }
        if (ok) rows.push_back(k);
    }
    return rows;
}

namespace {

struct ModelDesign {
    Eigen::MatrixXd x;
    std::vector<FittedTerm> terms;
    std::vector<Eigen::MatrixXd> penalties;  // per term, empty matrix if unpenalized
    std::vector<double> null_ridge;          // lifts the centered-constant direction
    std::vector<double> penalty_scale;       // mean penalty diagonal, for a lambda-scaled lift
    int total_cols = 0;
};

ModelDesign build_model_design(const SeriesFrame& design, const Formula& formula,
                               const std::vector<int64_t>& rows, const GamFitOptions& opts) {
    ModelDesign md;
    int offset = 1;  // intercept
    for (const auto& spec : formula.terms) {
        FittedTerm t = init_fitted_term(spec, design, rows, opts);
        t.col_start = offset;
        offset += t.col_count;
        md.terms.push_back(std::move(t));
    }
    md.total_cols = offset;

    md.x.resize(static_cast<Eigen::Index>(rows.size()), md.total_cols);
    md.x.col(0).setOnes();
    for (auto& t : md.terms) {
        Eigen::MatrixXd block = term_design(t, design, rows);
        if (t.penalized) {
            // Center smooth blocks on the training rows; the fitted effect
            // then sums to zero over the training sample by construction.
            t.centering.resize(static_cast<size_t>(block.cols()));
            for (Eigen::Index c = 0; c < block.cols(); ++c) {
                t.centering[static_cast<size_t>(c)] = block.col(c).mean();
                block.col(c).array() -= t.centering[static_cast<size_t>(c)];
            }
        }
        md.x.block(0, t.col_start, block.rows(), block.cols()) = block;
        md.penalties.push_back(term_penalty(t));
        // Centering makes the all-ones coefficient direction exactly null in
        // both the design block and the difference penalty; a scale-aware
        // ridge pins it without disturbing the fit.
        double energy = block.squaredNorm() / static_cast<double>(block.cols());
        md.null_ridge.push_back(t.penalized ? 1e-8 * std::max(energy, 1e-12) : 0.0);
        md.penalty_scale.push_back(
            t.penalized ? 1e-8 * md.penalties.back().diagonal().mean() : 0.0);
    }
    return md;
}

Eigen::MatrixXd assemble_penalty(const ModelDesign& md, const std::vector<double>& lambdas) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(md.total_cols, md.total_cols);
    for (size_t j = 0; j < md.terms.size(); ++j) {
        if (!md.terms[j].penalized) continue;
        const auto& t = md.terms[j];
        p.block(t.col_start, t.col_start, t.col_count, t.col_count) +=
            lambdas[j] * md.penalties[j];
        p.block(t.col_start, t.col_start, t.col_count, t.col_count).diagonal().array() +=
            md.null_ridge[j] + lambdas[j] * md.penalty_scale[j];
    }
    return p;
}

}  // namespace

GamModel fit_gam_model(const SeriesFrame& design, const Formula& formula,
                       const std::vector<int64_t>& rows_in, int half_hour,
                       const GamFitOptions& opts) {
    // Row order is an implementation detail; sorting makes the fit exactly
    // invariant to it.
    std::vector<int64_t> rows = rows_in;
    std::sort(rows.begin(), rows.end());
    ModelDesign md = build_model_design(design, formula, rows, opts);
    if (static_cast<int64_t>(rows.size()) <
        static_cast<int64_t>(opts.min_rows_per_dim) * md.total_cols)
        throw DataError("half-hour " + std::to_string(half_hour) + ": " +
                        std::to_string(rows.size()) + " rows for " +
                        std::to_string(md.total_cols) + " coefficients (need " +
                        std::to_string(opts.min_rows_per_dim) + " per coefficient)");

    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    const auto& resp = design.column(formula.response);
    for (size_t i = 0; i < rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = resp[rows[i]];

    NormalEquations ne(md.x, y);

    std::vector<double> lambdas(md.terms.size(), 1.0);
    std::vector<size_t> penalized;
    for (size_t j = 0; j < md.terms.size(); ++j)
        if (md.terms[j].penalized) penalized.push_back(j);

    // Coordinate-wise GCV over the lambda grid.
    for (int pass = 0; pass < opts.gcv_passes && !penalized.empty(); ++pass) {
        for (size_t j : penalized) {
            double best_gcv = std::numeric_limits<double>::infinity();
            double best_lambda = lambdas[j];
            for (double lam : opts.lambda_grid) {
                lambdas[j] = lam;
                PenalizedSolveInfo info;
                solve_penalized(ne, assemble_penalty(md, lambdas), 1.0, &info);
                if (info.gcv < best_gcv || (info.gcv == best_gcv && lam < best_lambda)) {
                    best_gcv = info.gcv;
                    best_lambda = lam;
                }
            }
            lambdas[j] = best_lambda;
        }
    }

    PenalizedSolveInfo info;
    Eigen::VectorXd beta = solve_penalized(ne, assemble_penalty(md, lambdas), 1.0, &info);

    GamModel model;
    model.half_hour = half_hour;
    model.coef = beta;
    model.terms = std::move(md.terms);
    model.n_train = static_cast<int64_t>(rows.size());
    model.edf = info.edf;
    double denom = static_cast<double>(rows.size()) - info.edf;
    model.resid_variance = denom > 0 ? info.rss / denom : info.rss;

    // Training statistics of each fitted effect, for the normalized export.
    for (size_t j = 0; j < model.terms.size(); ++j) {
        auto& t = model.terms[j];
        t.lambda = lambdas[j];
        Eigen::VectorXd effect =
            md.x.block(0, t.col_start, md.x.rows(), t.col_count) *
            beta.segment(t.col_start, t.col_count);
        t.effect_mean = effect.mean();
        double var = (effect.array() - t.effect_mean).square().mean();
        t.effect_sd = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return model;
}

GamBank fit_gam_bank(const SeriesFrame& design, const Formula& formula, int64_t window_start,
                     int64_t window_end, const GamFitOptions& opts) {
    const int64_t step = design.grid().step();
    const int n_models = static_cast<int>(kStepDay / step);

    std::vector<std::vector<int64_t>> rows(n_models);
    for (int h = 0; h < n_models; ++h)
        rows[h] = eligible_rows(design, formula, window_start, window_end, h);

    GamBank bank;
    bank.formula = formula;
    bank.train_start = window_start;
    bank.train_end = window_end;
    bank.models.resize(n_models);

    parallel_for(n_models, effective_threads(opts.n_threads), [&](int h) {
        bank.models[h] = fit_gam_model(design, formula, rows[h], h, opts);
    });
    return bank;
}

GamPrediction predict_gam(const GamBank& bank, const SeriesFrame& design) {
    const auto& hh = design.column(col::kHalfHour);
    const int64_t n = design.rows();
    const auto n_terms = static_cast<Eigen::Index>(bank.formula.terms.size());

    GamPrediction out;
    out.forecast.assign(n, missing());
    out.effects = Eigen::MatrixXd::Constant(n, n_terms, missing());
    out.normalized_effects = Eigen::MatrixXd::Constant(n, n_terms, missing());

    std::vector<const std::vector<double>*> cols;
    for (const auto& var : formula_variables(bank.formula)) cols.push_back(&design.column(var));

    std::vector<std::vector<int64_t>> rows_by_model(bank.models.size());
    for (int64_t k = 0; k < n; ++k) {
        bool ok = true;
        for (const auto* c : cols)
            if (is_missing((*c)[k])) {
                ok = false;
                break;
            }
        if (!ok) continue;
        auto h = static_cast<size_t>(hh[k]);
        if (h < rows_by_model.size()) rows_by_model[h].push_back(k);
    }

    for (size_t h = 0; h < bank.models.size(); ++h) {
        const auto& rows = rows_by_model[h];
        if (rows.empty()) continue;
        const GamModel& model = bank.models[h];
        Eigen::VectorXd acc = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows.size()),
                                                        model.coef[0]);
        for (Eigen::Index j = 0; j < n_terms; ++j) {
            const FittedTerm& t = model.terms[j];
            Eigen::MatrixXd block = term_design(t, design, rows, &out.n_clamped);
            Eigen::VectorXd effect = block * model.coef.segment(t.col_start, t.col_count);
            acc += effect;
            for (size_t i = 0; i < rows.size(); ++i) {
                out.effects(rows[i], j) = effect[static_cast<Eigen::Index>(i)];
                out.normalized_effects(rows[i], j) =
                    (effect[static_cast<Eigen::Index>(i)] - t.effect_mean) / t.effect_sd;
            }
        }
        for (size_t i = 0; i < rows.size(); ++i)
            out.forecast[rows[i]] = acc[static_cast<Eigen::Index>(i)];
    }
    return out;
}

Formula seasonality_formula() {
    return parse_formula(
        "load ~ daytype:dls + s(toy, k=20, cyclic) + s(temp95, k=5) + s(temp99, k=5) + "
        "te(tempmin99, tempmax99, k=4)");
}

GamBank seasonality_gam(const SeriesFrame& design, int64_t window_start, int64_t window_end,
                        const GamFitOptions& opts) {
    return fit_gam_bank(design, seasonality_formula(), window_start, window_end, opts);
}

Formula full_model_formula() {
    return parse_formula(
        "load ~ daytype:dls + lagterm(load1d, by=daytype) + load1w + s(trend, k=4) + "
        "s(toy, k=20, cyclic) + te(trend, temp, k=5) + s(temp95, k=5) + s(temp99, k=5) + "
        "te(tempmin99, tempmax99, k=4)");
}

Formula mobility_residual_formula(const std::string& response) {
    return parse_formula(response +
                         " ~ daytype:dls + s(toy, k=20, cyclic) + s(work, k=5) + "
                         "s(resident, k=5)");
}

std::vector<std::pair<std::string, Formula>> nested_model_set() {
    const std::string time_terms = "daytype:dls + holiday + s(toy, k=20, cyclic)";
    const std::string lag_terms = "lagterm(load1d, by=daytype) + load1w";
    return {
        {"Temp", parse_formula("load ~ s(temp95, k=5)")},
        {"Temp + Work", parse_formula("load ~ s(temp95, k=5) + s(work, k=5)")},
        {"Temp + Time", parse_formula("load ~ " + time_terms + " + s(temp95, k=5)")},
        {"Temp + Time + Work",
         parse_formula("load ~ " + time_terms + " + s(temp95, k=5) + s(work, k=5)")},
        {"Temp + Work + Lags",
         parse_formula("load ~ s(temp95, k=5) + s(work, k=5) + " + lag_terms)},
        {"Temp + Time + Lags",
         parse_formula("load ~ " + time_terms + " + s(temp95, k=5) + " + lag_terms)},
        {"All variables", parse_formula("load ~ " + time_terms + " + s(temp95, k=5) + " +
                                        lag_terms + " + s(work, k=5)")},
    };
}

NestedSuiteResult nested_gam_suite(const SeriesFrame& design, int64_t train_start,
                                   int64_t train_end, const std::vector<EvalWindow>& windows,
                                   bool with_f_stats, const GamFitOptions& opts) {
    NestedSuiteResult result;
    const auto& load = design.column(col::kLoad);

    for (const auto& [name, formula] : nested_model_set()) {
        GamBank bank;
        try {
            bank = fit_gam_bank(design, formula, train_start, train_end, opts);
        } catch (const std::exception& e) {
            result.failures.push_back(name + ": " + e.what());
            continue;
        }
        GamPrediction pred = predict_gam(bank, design);

        for (const auto& w : windows) {
            std::vector<double> y, yhat;
            for (int64_t k = 0; k < design.rows(); ++k) {
                int64_t t = design.grid().at(k);
                if (t < w.start || t >= w.end) continue;
                if (is_missing(load[k]) || is_missing(pred.forecast[k])) continue;
                y.push_back(load[k]);
                yhat.push_back(pred.forecast[k]);
            }
            NestedModelScore score;
            score.model = name;
            score.window = w.name;
            score.rmse = rmse(y, yhat);
            score.mape = mape(y, yhat);
            result.scores.push_back(score);
        }

        if (!with_f_stats) continue;
        // Nested-RSS F statistic per smooth: refit without the term and pool
        // RSS/edf across the bank.
        auto pooled = [&](const GamBank& b) {
            double rss = 0.0, edf = 0.0;
            int64_t n = 0;
            for (const auto& m : b.models) {
                double den = static_cast<double>(m.n_train) - m.edf;
                rss += m.resid_variance * (den > 0 ? den : 0.0);
                edf += m.edf;
                n += m.n_train;
            }
            return std::tuple<double, double, int64_t>(rss, edf, n);
        };
        auto [rss_full, edf_full, n_full] = pooled(bank);
        for (size_t j = 0; j < formula.terms.size(); ++j) {
            if (!std::holds_alternative<SmoothTerm>(formula.terms[j]) &&
                !std::holds_alternative<TensorTerm>(formula.terms[j]))
                continue;
            Formula reduced = formula;
            reduced.terms.erase(reduced.terms.begin() + static_cast<long>(j));
            try {
                GamBank rbank = fit_gam_bank(design, reduced, train_start, train_end, opts);
                auto [rss_red, edf_red, n_red] = pooled(rbank);
                (void)n_red;
                double df_num = edf_full - edf_red;
                double df_den = static_cast<double>(n_full) - edf_full;
                if (df_num > 0 && df_den > 0 && rss_full > 0) {
                    SmoothFStat f;
                    f.model = name;
                    f.term = term_label(formula.terms[j]);
                    f.df_num = df_num;
                    f.df_den = df_den;
                    f.f_stat = ((rss_red - rss_full) / df_num) / (rss_full / df_den);
                    result.f_stats.push_back(f);
                }
            } catch (const std::exception& e) {
                result.failures.push_back(name + " \\ " + term_label(formula.terms[j]) + ": " +
                                          e.what());
            }
        }
    }
    return result;
}

}  // namespace loadcast
