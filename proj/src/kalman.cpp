#include "loadcast/kalman.hpp"

#include <algorithm>
#include <cmath>

namespace loadcast {

KalmanState KalmanState::initial(int dim) {
    KalmanState s;
    s.theta = Eigen::VectorXd::Ones(dim);
    s.theta[0] = 0.0;
    s.P = Eigen::MatrixXd::Identity(dim, dim);
    return s;
}

NoiseConfig NoiseConfig::isotropic(int dim, double q, double sigma2) {
    if (q < 0.0) throw DataError("process noise must be nonnegative");
    if (sigma2 <= 0.0) throw DataError("observation variance must be positive");
    NoiseConfig n;
    n.q_diag = Eigen::VectorXd::Constant(dim, q);
    n.sigma2 = sigma2;
    return n;
}

double kalman_step(KalmanState& state, const Eigen::VectorXd& x, double y,
                   const NoiseConfig& noise) {
    if (x.size() != state.theta.size()) throw DataError("kalman: dimension mismatch");
    if (!std::isfinite(y)) throw DataError("kalman: non-finite observation");

    const double prediction = state.theta.dot(x);

    state.P.diagonal() += noise.q_diag;
    Eigen::VectorXd px = state.P * x;
    double innov_var = x.dot(px) + noise.sigma2;
    if (!std::isfinite(innov_var) || innov_var <= 0.0)
        throw NumericError("kalman: non-finite innovation variance");

    Eigen::VectorXd gain = px / innov_var;
    state.theta += gain * (y - prediction);
    state.P -= gain * px.transpose();
    // Symmetrize; the subtraction above loses symmetry at roundoff level.
    state.P = 0.5 * (state.P + state.P.transpose()).eval();
    ++state.step;
    return prediction;
}

FilterRun run_static(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                     KalmanState init, double sigma2) {
    return run_dynamic(effects, loads, std::move(init),
                       NoiseConfig::isotropic(static_cast<int>(effects.cols()), 0.0, sigma2));
}

FilterRun run_dynamic(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                      KalmanState init, const NoiseConfig& noise) {
    if (static_cast<size_t>(effects.rows()) != loads.size())
        throw DataError("kalman: effects rows do not match load stream length");
    FilterRun run;
    run.predictions.reserve(loads.size());
    KalmanState state = std::move(init);
    for (Eigen::Index t = 0; t < effects.rows(); ++t)
        run.predictions.push_back(kalman_step(state, effects.row(t).transpose(), loads[t], noise));
    run.final_state = std::move(state);
    return run;
}

std::vector<double> default_ratio_grid() {
    std::vector<double> grid;
    for (int e = -30; e <= 0; e += 2) grid.push_back(std::pow(2.0, e));
    return grid;
}

NoiseConfig grid_search_dynamic(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                                int64_t burn_start, int64_t burn_end,
                                const std::vector<double>& ratio_grid, const KalmanState* init) {
    if (ratio_grid.empty()) throw DataError("ratio grid is empty");
    if (burn_start < 0 || burn_end > static_cast<int64_t>(loads.size()) || burn_start >= burn_end)
        throw DataError("burn window outside the stream");
    const int dim = static_cast<int>(effects.cols());

    double best_ratio = ratio_grid.front();
    double best_sse = 0.0;
    bool have_best = false;
    for (double ratio : ratio_grid) {
        // Gains depend on (P0, Q, sigma2) only through their ratios, so the
        // search runs at sigma2 = 1 and rescales afterwards.
        KalmanState state = init ? *init : KalmanState::initial(dim);
        NoiseConfig noise = NoiseConfig::isotropic(dim, ratio, 1.0);
        double sse = 0.0;
        for (Eigen::Index t = 0; t < effects.rows() && t < burn_end; ++t) {
            double pred = kalman_step(state, effects.row(t).transpose(), loads[t], noise);
            if (t >= burn_start) {
                double e = loads[t] - pred;
                sse += e * e;
            }
        }
        // Strict improvement required, so ties keep the smaller ratio.
        if (!have_best || sse < best_sse * (1.0 - 1e-12)) {
            have_best = true;
            best_sse = sse;
            best_ratio = ratio;
        }
    }

    // Innovation-variance MLE at the chosen ratio: scale factor c such that
    // e_t^2 ~ c * s_t with s_t the unit-sigma2 innovation variance.
    KalmanState state = init ? *init : KalmanState::initial(dim);
    NoiseConfig unit = NoiseConfig::isotropic(dim, best_ratio, 1.0);
    double acc = 0.0;
    int64_t n = 0;
    for (Eigen::Index t = 0; t < effects.rows() && t < burn_end; ++t) {
        Eigen::VectorXd x = effects.row(t).transpose();
        Eigen::MatrixXd pq = state.P;
        pq.diagonal() += unit.q_diag;
        double s = x.dot(pq * x) + 1.0;
        double pred = kalman_step(state, x, loads[t], unit);
        if (t >= burn_start) {
            double e = loads[t] - pred;
            acc += e * e / s;
            ++n;
        }
    }
    double sigma2 = n > 0 ? std::max(acc / static_cast<double>(n), 1e-12) : 1.0;
    return NoiseConfig::isotropic(dim, best_ratio * sigma2, sigma2);
}

VikingRun run_viking(const Eigen::MatrixXd& effects, const std::vector<double>& loads,
                     KalmanState init, NoiseConfig start, const VikingHyper& hyper) {
    if (hyper.rho_q < 0.0 || hyper.rho_sigma < 0.0)
        throw DataError("viking learning rates must be nonnegative");
    if (static_cast<size_t>(effects.rows()) != loads.size())
        throw DataError("viking: effects rows do not match load stream length");

    const int dim = static_cast<int>(effects.cols());
    double log_q = std::log(std::max(start.q_diag.size() ? start.q_diag[0] : 1e-12, 1e-300));
    double log_s = std::log(start.sigma2);
    constexpr double kClip = 0.1;

    VikingRun run;
    run.predictions.reserve(loads.size());
    run.sigma2_path.reserve(loads.size());
    KalmanState state = std::move(init);

    for (Eigen::Index t = 0; t < effects.rows(); ++t) {
        double q = std::exp(log_q);
        double sigma2 = std::exp(log_s);
        NoiseConfig noise = NoiseConfig::isotropic(dim, q, sigma2);

        Eigen::VectorXd x = effects.row(t).transpose();
        Eigen::MatrixXd pq = state.P;
        pq.diagonal() += noise.q_diag;
        double xpqx = x.dot(pq * x);
        double s = xpqx + sigma2;

        double pred = kalman_step(state, x, loads[t], noise);
        run.predictions.push_back(pred);
        run.sigma2_path.push_back(sigma2);

        double e = loads[t] - pred;
        // d NLL / d log v for s = xpqx + sigma2: (v/2s) (1 - e^2/s), with
        // v = sigma2 (observation) or v = q (through xpqx ~ q x'x).
        double common = (1.0 - e * e / s) / (2.0 * s);
        double grad_s = sigma2 * common;
        double grad_q = q * x.squaredNorm() * common;
        log_s -= std::clamp(hyper.rho_sigma * grad_s, -kClip, kClip);
        log_q -= std::clamp(hyper.rho_q * grad_q, -kClip, kClip);
        log_s = std::clamp(log_s, -40.0, 40.0);
        log_q = std::clamp(log_q, -700.0, 40.0);
    }

    run.final_state = std::move(state);
    run.final_q = std::exp(log_q);
    run.final_sigma2 = std::exp(log_s);
    return run;
}

}  // namespace loadcast
