#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "loadcast/gam.hpp"

namespace loadcast {

// Regression tree with greedy variance-reduction splits. Split ties go to the
// lower feature index, then the lower threshold, so fits are deterministic.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf mean
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const Eigen::VectorXd& row) const;
};

// `rows` selects the training sample (with repeats for bootstraps); nullptr
// uses every row once.
Tree fit_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_depth, int min_leaf,
              int mtry, std::mt19937_64& rng, const std::vector<int64_t>* rows = nullptr);

enum class BootstrapKind { Iid, Block };

struct ForestConfig {
    int n_trees = 1000;
    int max_depth = 6;
    int mtry = 0;  // 0 = ceil(sqrt(p))
    int min_leaf = 2;
    BootstrapKind bootstrap = BootstrapKind::Iid;
    int64_t block_len = 48;  // one day of half-hours
};

// Concatenated uniformly-started contiguous blocks (wrapping), truncated to n.
std::vector<int64_t> block_bootstrap_indices(int64_t n, int64_t block_len, std::mt19937_64& rng);

struct Forest {
    ForestConfig config;
    std::vector<Tree> trees;
    double predict(const Eigen::VectorXd& row) const;
    std::vector<double> predict_rows(const Eigen::MatrixXd& rows) const;
};

// Trees use independent RNG substreams keyed by (seed, tree index), so the
// same seed gives a bit-identical forest regardless of thread count.
Forest fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestConfig& config,
                  uint64_t seed, int n_threads = 0);

// Componentwise L2 boosting with the formula's terms as penalized-spline weak
// learners: each step refits every term to the residuals and keeps the best
// RSS reducer, scaled by the shrinkage.
struct GamBoostOptions {
    int steps = 500;
    double shrinkage = 0.1;
    // < 0 selects each term's lambda by GCV on the initial residuals once.
    double fixed_lambda = -1.0;
    std::vector<double> lambda_grid = default_lambda_grid();
};

struct GamBoostModel {
    double intercept = 0.0;
    std::vector<FittedTerm> terms;
    std::vector<Eigen::VectorXd> coefs;   // accumulated per-term coefficients
    std::vector<int> selection_path;      // chosen term per step
    std::vector<double> train_rss_path;   // after each step
    double shrinkage = 0.1;
};

GamBoostModel fit_gam_boost(const SeriesFrame& design, const std::vector<FormulaTerm>& terms,
                            const std::string& response, const std::vector<int64_t>& rows,
                            const GamBoostOptions& opts = {});

std::vector<double> predict_gam_boost(const GamBoostModel& model, const SeriesFrame& design,
                                      const std::vector<int64_t>& rows);

}  // namespace loadcast
