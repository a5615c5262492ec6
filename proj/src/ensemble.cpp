#include "loadcast/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace loadcast {

double Tree::predict(const Eigen::VectorXd& row) const {
    int node = 0;
    while (nodes[node].feature >= 0) {
        const TreeNode& n = nodes[node];
        node = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[node].value;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double reduction = 0.0;
    int64_t n_left = 0;
};

double subset_mean(const Eigen::VectorXd& y, const std::vector<int64_t>& idx) {
    double acc = 0.0;
    for (int64_t i : idx) acc += y[i];
    return idx.empty() ? 0.0 : acc / static_cast<double>(idx.size());
}

// Best variance-reduction split over the sampled features; ties resolved to
// the lower feature index then the lower threshold.
SplitChoice best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const std::vector<int64_t>& idx, const std::vector<int>& features,
                       int min_leaf) {
    SplitChoice best;
    const auto n = static_cast<int64_t>(idx.size());
    std::vector<std::pair<double, double>> xv(static_cast<size_t>(n));  // (x, y)

    double sum_all = 0.0;
    for (int64_t i : idx) sum_all += y[i];

    for (int f : features) {
        for (int64_t i = 0; i < n; ++i) xv[i] = {x(idx[i], f), y[idx[i]]};
        std::sort(xv.begin(), xv.end());

        double left_sum = 0.0;
        for (int64_t i = 0; i + 1 < n; ++i) {
            left_sum += xv[i].second;
            if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
            if (xv[i].first == xv[i + 1].first) continue;
            double nl = static_cast<double>(i + 1);
            double nr = static_cast<double>(n - i - 1);
            double right_sum = sum_all - left_sum;
            // SSE reduction = nl*mean_l^2 + nr*mean_r^2 - n*mean^2.
            double reduction = left_sum * left_sum / nl + right_sum * right_sum / nr -
                               sum_all * sum_all / static_cast<double>(n);
            double threshold = 0.5 * (xv[i].first + xv[i + 1].first);
            if (reduction > best.reduction + 1e-12 ||
                (!best.found && reduction > 0.0)) {
                best.found = true;
                best.feature = f;
                best.threshold = threshold;
                best.reduction = reduction;
                best.n_left = i + 1;
            }
        }
    }
    return best;
}

int grow(std::vector<TreeNode>& nodes, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         std::vector<int64_t>& idx, int depth, int max_depth, int min_leaf, int mtry,
         std::mt19937_64& rng) {
    int self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[self].value = subset_mean(y, idx);

    if (depth >= max_depth || static_cast<int64_t>(idx.size()) < 2 * min_leaf) return self;

    // Sample mtry candidate features without replacement, scanned in index order.
    std::vector<int> features(static_cast<size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (mtry < x.cols()) {
        for (int i = 0; i < mtry; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(features.size()) - 1);
            std::swap(features[i], features[pick(rng)]);
        }
        features.resize(mtry);
        std::sort(features.begin(), features.end());
    }

    SplitChoice split = best_split(x, y, idx, features, min_leaf);
    if (!split.found) return self;

    std::vector<int64_t> left, right;
    left.reserve(idx.size());
    right.reserve(idx.size());
    for (int64_t i : idx)
        (x(i, split.feature) <= split.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    nodes[self].feature = split.feature;
    nodes[self].threshold = split.threshold;
    int l = grow(nodes, x, y, left, depth + 1, max_depth, min_leaf, mtry, rng);
    int r = grow(nodes, x, y, right, depth + 1, max_depth, min_leaf, mtry, rng);
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
}

}  // namespace

Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_leaf,
              int mtry, std::mt19937_64& rng, const std::vector<int64_t>* rows) {
    if (x.rows() < 2) throw DataError("tree needs at least 2 rows");
    if (x.rows() != y.size()) throw DataError("tree: row/target length mismatch");
    if (mtry <= 0 || mtry > x.cols()) mtry = static_cast<int>(x.cols());
    Tree tree;
    std::vector<int64_t> idx;
    if (rows) {
        idx = *rows;
    } else {
        idx.resize(static_cast<size_t>(x.rows()));
        std::iota(idx.begin(), idx.end(), 0);
    }
    if (idx.size() < 2) throw DataError("tree needs at least 2 rows");
    grow(tree.nodes, x, y, idx, 0, max_depth, std::max(1, min_leaf), mtry, rng);
    return tree;
}

std::vector<int64_t> block_bootstrap_indices(int64_t n, int64_t block_len, std::mt19937_64& rng) {
    if (block_len < 1 || block_len > n) throw DataError("block length must be in [1, n]");
    std::vector<int64_t> idx;
    idx.reserve(static_cast<size_t>(n));
    std::uniform_int_distribution<int64_t> start(0, n - 1);
    while (static_cast<int64_t>(idx.size()) < n) {
        int64_t s = start(rng);
        for (int64_t j = 0; j < block_len && static_cast<int64_t>(idx.size()) < n; ++j)
            idx.push_back((s + j) % n);
    }
    return idx;
}

double Forest::predict(const Eigen::VectorXd& row) const {
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(row);
    return acc / static_cast<double>(trees.size());
}

std::vector<double> Forest::predict_rows(const Eigen::MatrixXd& rows) const {
    std::vector<double> out(static_cast<size_t>(rows.rows()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        Eigen::VectorXd row = rows.row(i).transpose();
        out[static_cast<size_t>(i)] = predict(row);
    }
    return out;
}

Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config,
                  uint64_t seed, int n_threads) {
    if (config.n_trees < 1) throw DataError("forest needs at least one tree");
    ForestConfig cfg = config;
    if (cfg.mtry <= 0)
        cfg.mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));

    Forest forest;
    forest.config = cfg;
    forest.trees.resize(static_cast<size_t>(cfg.n_trees));

    int threads = n_threads > 0 ? n_threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int t = next.fetch_add(1); t < cfg.n_trees; t = next.fetch_add(1)) {
            std::mt19937_64 rng(mix_seed(seed, static_cast<uint64_t>(t)));
            int64_t block = cfg.bootstrap == BootstrapKind::Block ? cfg.block_len : 1;
            block = std::min<int64_t>(block, x.rows());
            auto sample = block_bootstrap_indices(x.rows(), block, rng);
            forest.trees[static_cast<size_t>(t)] =
                fit_tree(x, y, cfg.max_depth, cfg.min_leaf, cfg.mtry, rng, &sample);
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return forest;
}

GamBoostModel fit_gam_boost(const SeriesFrame& design, const std::vector<FormulaTerm>& terms,
                            const std::string& response, const std::vector<int64_t>& rows,
                            const GamBoostOptions& opts) {
    if (opts.steps < 1) throw DataError("boosting needs at least one step");
    if (opts.shrinkage <= 0.0 || opts.shrinkage > 1.0)
        throw DataError("shrinkage must be in (0, 1]");
    if (terms.empty()) throw DataError("boosting needs at least one term");

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd y(n);
    const auto& resp = design.column(response);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = resp[rows[i]];

    GamBoostModel model;
    model.shrinkage = opts.shrinkage;
    model.intercept = y.mean();
    Eigen::VectorXd residual = y.array() - model.intercept;

    struct Learner {
        Eigen::MatrixXd block;
        Eigen::LDLT<Eigen::MatrixXd> factor;
    };
    std::vector<Learner> learners;

    for (const auto& spec : terms) {
        FittedTerm t = init_fitted_term(spec, design, rows);
        Eigen::MatrixXd block = term_design(t, design, rows);
        t.centering.resize(static_cast<size_t>(block.cols()));
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
            t.centering[static_cast<size_t>(c)] = block.col(c).mean();
            block.col(c).array() -= t.centering[static_cast<size_t>(c)];
        }
        Eigen::MatrixXd penalty = term_penalty(t);
        // The centered block has an exact null direction shared with the
        // difference penalty; lift it before any solve.
        double ridge = 1e-8 * std::max(block.squaredNorm() / block.cols(), 1e-12);
        penalty.diagonal().array() += 1e-8 * std::max(penalty.diagonal().mean(), 1e-12);
        double lambda = opts.fixed_lambda;
        if (t.penalized && lambda < 0.0)
            lambda = select_lambda(block, penalty, residual, opts.lambda_grid);
        if (!t.penalized) lambda = 0.0;
        t.lambda = lambda;

        Learner lr;
        lr.factor.compute(block.transpose() * block + lambda * penalty +
                          ridge * Eigen::MatrixXd::Identity(block.cols(), block.cols()));
        lr.block = std::move(block);
        model.terms.push_back(std::move(t));
        model.coefs.emplace_back(Eigen::VectorXd::Zero(lr.block.cols()));
        learners.push_back(std::move(lr));
    }

    for (int step = 0; step < opts.steps; ++step) {
        int best = -1;
        double best_reduction = 0.0;
        Eigen::VectorXd best_beta, best_fit;
        for (size_t j = 0; j < learners.size(); ++j) {
            Eigen::VectorXd beta = learners[j].factor.solve(learners[j].block.transpose() * residual);
            Eigen::VectorXd fit = learners[j].block * beta;
            double reduction = 2.0 * residual.dot(fit) - fit.squaredNorm();
            if (reduction > best_reduction + 1e-15) {
                best = static_cast<int>(j);
                best_reduction = reduction;
                best_beta = std::move(beta);
                best_fit = std::move(fit);
            }
        }
        if (best < 0) break;  // no learner reduces the RSS further
        model.coefs[static_cast<size_t>(best)] += opts.shrinkage * best_beta;
        residual -= opts.shrinkage * best_fit;
        model.selection_path.push_back(best);
        model.train_rss_path.push_back(residual.squaredNorm());
    }
    return model;
}

std::vector<double> predict_gam_boost(const GamBoostModel& model, const SeriesFrame& design,
                                      const std::vector<int64_t>& rows) {
    Eigen::VectorXd acc =
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows.size()), model.intercept);
    for (size_t j = 0; j < model.terms.size(); ++j) {
        if (model.coefs[j].isZero(0.0)) continue;
        acc += term_design(model.terms[j], design, rows) * model.coefs[j];
    }
    std::vector<double> out(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out[i] = acc[static_cast<Eigen::Index>(i)];
    return out;
}

}  // namespace loadcast
