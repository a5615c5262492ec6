#pragma once

#include <Eigen/Dense>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// Time-varying linear regression of the observed load on a GAM effect vector
// (1, f1_bar(x), ..., fd_bar(x)), filtered one step ahead. One state per
// half-hour chain; each chain is strictly sequential.

struct KalmanState {
    Eigen::VectorXd theta;
    Eigen::MatrixXd P;
    int64_t step = 0;

    static KalmanState initial(int dim);  // theta = (0,1,...,1), P = I
};

struct NoiseConfig {
    Eigen::VectorXd q_diag;  // process noise diagonal (q * I by default)
    double sigma2 = 1.0;     // observation variance > 0

    static NoiseConfig isotropic(int dim, double q, double sigma2);
};

// One filter update. Returns the one-step-ahead prediction theta^T x formed
// before the state sees y.
double kalman_step(KalmanState& state, const Eigen::VectorXd& x, double y,
                   const NoiseConfig& noise);

struct FilterRun {
    std::vector<double> predictions;
    KalmanState final_state;
};

// Q = 0 degenerate filter (recursive ridge toward the prior).
FilterRun run_static(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                     KalmanState init, double sigma2);

FilterRun run_dynamic(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                      KalmanState init, const NoiseConfig& noise);

// The benchmark grid of q/sigma^2 ratios: 2^-30, 2^-28, ..., 2^0.
std::vector<double> default_ratio_grid();

// Selects the ratio minimizing one-step-ahead squared error on the burn
// window (indices [burn_start, burn_end)), ties to the smaller ratio, then
// sets sigma2 to the innovation-variance MLE at the chosen ratio.
NoiseConfig grid_search_dynamic(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                                int64_t burn_start, int64_t burn_end,
                                const std::vector<double>& ratio_grid = default_ratio_grid(),
                                const KalmanState* init = nullptr);

// viking-lite: after each step, log sigma2 and log q take a bounded gradient
// step (clipped to +-0.1) on the predictive negative log-likelihood of the
// innovation.
struct VikingHyper {
    double rho_q = 0.0;
    double rho_sigma = 0.0;
};

struct VikingRun {
    std::vector<double> predictions;
    KalmanState final_state;
    double final_q = 0.0;
    double final_sigma2 = 1.0;
    std::vector<double> sigma2_path;
};

VikingRun run_viking(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                     KalmanState init, NoiseConfig start, const VikingHyper& hyper);

}  // namespace loadcast
