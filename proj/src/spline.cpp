#include "loadcast/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loadcast {

int SplineBasis::dim() const {
    if (kind == Kind::CyclicCubicBSpline) {
        // knots span one period with knots.size()-1 intervals, one basis each.
        return static_cast<int>(knots.size()) - 1;
    }
    return static_cast<int>(knots.size()) - degree - 1;
}

SplineBasis SplineBasis::uniform(double a, double b, int dim) {
    if (dim < 4) throw DataError("cubic spline basis needs dimension >= 4");
    if (!(a < b)) throw DataError("spline domain is empty");
    SplineBasis basis;
    basis.kind = Kind::CubicBSpline;
    basis.domain_min = a;
    basis.domain_max = b;
    int intervals = dim - basis.degree;
    double h = (b - a) / intervals;
    for (int i = -basis.degree; i <= intervals + basis.degree; ++i)
        basis.knots.push_back(a + i * h);
    return basis;
}

SplineBasis SplineBasis::cyclic(double a, double b, int dim) {
    if (dim < 3) throw DataError("spline dimension below minimum of 3");
    if (!(a < b)) throw DataError("spline domain is empty");
    SplineBasis basis;
    basis.kind = Kind::CyclicCubicBSpline;
    basis.domain_min = a;
    basis.domain_max = b;
    double h = (b - a) / dim;
    for (int i = 0; i <= dim; ++i) basis.knots.push_back(a + i * h);
    return basis;
}

namespace {

// Cox-de Boor: values of all basis functions of `degree` at x given a full
// knot vector. Returns the index of the first nonzero basis function and
// writes degree+1 values.
int cox_de_boor(const std::vector<double>& knots, int degree, double x, double* values) {
    int hi = static_cast<int>(knots.size()) - degree - 2;
    int mu = degree;
    while (mu < hi && x >= knots[mu + 1]) ++mu;

    values[0] = 1.0;
    for (int d = 1; d <= degree; ++d) {
        double saved = 0.0;
        for (int r = 0; r < d; ++r) {
            double left = knots[mu - d + 1 + r + d] - knots[mu - d + 1 + r];
            double term = left > 0.0 ? values[r] / left : 0.0;
            values[r] = saved + (knots[mu + 1 + r] - x) * term;
            saved = (x - knots[mu - d + 1 + r]) * term;
        }
        values[d] = saved;
    }
    return mu - degree;
}

}  // namespace

Eigen::MatrixXd bspline_design(const std::vector<double>& x, const SplineBasis& basis,
                               int64_t* n_clamped) {
    const int degree = basis.degree;
    if (static_cast<int>(basis.knots.size()) < degree + 2)
        throw DataError("spline needs at least degree+2 knots");
    for (size_t i = 1; i < basis.knots.size(); ++i)
        if (!(basis.knots[i - 1] < basis.knots[i]))
            throw DataError("spline knots must be strictly increasing");

    const bool cyclic = basis.kind == SplineBasis::Kind::CyclicCubicBSpline;
    const int dim = basis.dim();
    const double a = basis.domain_min, b = basis.domain_max;

    // Cyclic evaluation reuses the plain recursion on a period-extended knot
    // vector and folds column indices modulo dim.
    std::vector<double> knots = basis.knots;
    if (cyclic) {
        double period = b - a;
        std::vector<double> extended;
        for (int i = degree; i >= 1; --i) extended.push_back(basis.knots[dim - i] - period);
        for (double k : basis.knots) extended.push_back(k);
        for (int i = 1; i <= degree; ++i) extended.push_back(basis.knots[i] + period);
        knots = std::move(extended);
    }

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), dim);
    double values[8];
    for (size_t row = 0; row < x.size(); ++row) {
        double v = x[row];
        if (cyclic) {
            double period = b - a;
            v = std::fmod(v - a, period);
            if (v < 0.0) v += period;
            v += a;
        } else if (v < a || v > b) {
            if (n_clamped) ++(*n_clamped);
            v = std::clamp(v, a, b);
        }
        int first = cox_de_boor(knots, degree, v, values);
        for (int j = 0; j <= degree; ++j) {
            int cidx = first + j;
            if (cyclic) {
                cidx = (cidx - degree) % dim;
                if (cidx < 0) cidx += dim;
            }
            design(static_cast<Eigen::Index>(row), cidx) += values[j];
        }
    }
    return design;
}

Eigen::MatrixXd second_difference_penalty(int dim, bool cyclic) {
    if (dim < 3) throw DataError("penalty needs dimension >= 3");
    int rows = cyclic ? dim : dim - 2;
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(rows, dim);
    for (int r = 0; r < rows; ++r) {
        d2(r, r % dim) += 1.0;
        d2(r, (r + 1) % dim) += -2.0;
        d2(r, (r + 2) % dim) += 1.0;
    }
    return d2.transpose() * d2;
}

NormalEquations::NormalEquations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw DataError("design rows do not match response length");
    xtx = X.transpose() * X;
    xty = X.transpose() * y;
    yty = y.squaredNorm();
    n = X.rows();
}

Eigen::VectorXd solve_penalized(const NormalEquations& ne, const Eigen::MatrixXd& penalty,
                                double lambda, PenalizedSolveInfo* info) {
    if (lambda < 0.0) throw DataError("lambda must be nonnegative");
    Eigen::MatrixXd m = ne.xtx;
    if (lambda > 0.0) m += lambda * penalty;

    // Equilibrate to unit diagonal so the rank check and the factorization
    // are insensitive to the very different scales of design blocks.
    Eigen::VectorXd diag = m.diagonal();
    bool bad = !diag.allFinite() || diag.minCoeff() <= 0.0;
    Eigen::VectorXd beta;
    if (!bad) {
        Eigen::VectorXd scale = diag.cwiseSqrt();
        Eigen::VectorXd inv_scale = scale.cwiseInverse();
        Eigen::MatrixXd meq = inv_scale.asDiagonal() * m * inv_scale.asDiagonal();
        Eigen::VectorXd beq = inv_scale.asDiagonal() * ne.xty;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(meq);
        bad = ldlt.info() != Eigen::Success;
        if (!bad) {
            // Exact rank deficiency shows up as vanishing pivots.
            Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
            bad = !pivots.allFinite() || pivots.minCoeff() <= 1e-15 * pivots.maxCoeff();
        }
        if (!bad) {
            Eigen::VectorXd x = ldlt.solve(beq);
            // Iterative refinement, driven by the residual of the original
            // (unequilibrated) system: that is the gradient the contract
            // bounds. Stops when converged or stalled.
            double full_denom = 1.0 + ne.xty.norm();
            auto residual_of = [&](const Eigen::VectorXd& v) {
                return (scale.asDiagonal() * (meq * v - beq)).norm();
            };
            double resid = residual_of(x);
            for (int iter = 0; iter < 30 && resid > 1e-10 * full_denom; ++iter) {
                Eigen::VectorXd candidate = x + ldlt.solve(beq - meq * x);
                if (!candidate.allFinite()) break;
                double next = residual_of(candidate);
                if (next >= resid) break;
                x = candidate;
                resid = next;
            }
            beta = inv_scale.asDiagonal() * x;
            // The achievable residual is floored by eps * |M| * |beta|; the
            // safety net must not fire on well-posed but extreme scalings.
            double fp_floor = 1e-13 * m.cwiseAbs().rowwise().sum().maxCoeff() * beta.norm();
            bad = !beta.allFinite() || resid > 1e-7 * full_denom + fp_floor;
            if (!bad && info) {
                info->rss = std::max(
                    0.0, ne.yty - 2.0 * beta.dot(ne.xty) + beta.dot(ne.xtx * beta));
                info->edf = ldlt.solve(inv_scale.asDiagonal() * ne.xtx *
                                       inv_scale.asDiagonal())
                                .trace();
                double gcv_denom = static_cast<double>(ne.n) - info->edf;
                info->gcv = gcv_denom > 0
                                ? static_cast<double>(ne.n) * info->rss / (gcv_denom * gcv_denom)
                                : std::numeric_limits<double>::infinity();
            }
        }
    }
    if (bad) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        double lo = es.eigenvalues().minCoeff();
        double hi = es.eigenvalues().maxCoeff();
        throw NumericError("penalized system is numerically singular (eigenvalue range [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "])");
    }
    return beta;
}

Eigen::VectorXd fit_penalized(const Eigen::MatrixXd& X, const Eigen::MatrixXd& penalty,
                              double lambda, const Eigen::VectorXd& y, PenalizedSolveInfo* info) {
    if (penalty.rows() != X.cols() || penalty.cols() != X.cols())
        throw DataError("penalty dimensions do not match design columns");
    NormalEquations ne(X, y);
    return solve_penalized(ne, penalty, lambda, info);
}

double select_lambda(const Eigen::MatrixXd& X, const Eigen::MatrixXd& penalty,
                     const Eigen::VectorXd& y, const std::vector<double>& grid) {
    if (grid.empty()) throw DataError("lambda grid is empty");
    NormalEquations ne(X, y);
    double best_lambda = grid.front();
    double best_gcv = std::numeric_limits<double>::infinity();
    for (double lam : grid) {
        PenalizedSolveInfo info;
        solve_penalized(ne, penalty, lam, &info);
        if (info.gcv < best_gcv || (info.gcv == best_gcv && lam < best_lambda)) {
            best_gcv = info.gcv;
            best_lambda = lam;
        }
    }
    return best_lambda;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 0; i < 13; ++i) grid.push_back(std::pow(10.0, -4.0 + i));
    return grid;
}

}  // namespace loadcast
