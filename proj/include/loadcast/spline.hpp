#pragma once

#include <Eigen/Dense>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// Cubic B-spline basis on a strictly increasing knot vector, evaluated by the
// Cox-de Boor recursion. The cyclic kind wraps a uniform basis around its
// domain so that basis values and first two derivatives match at the ends.
struct SplineBasis {
    enum class Kind { CubicBSpline, CyclicCubicBSpline };

    Kind kind = Kind::CubicBSpline;
    std::vector<double> knots;  // full knot vector, strictly increasing
    int degree = 3;
    double domain_min = 0.0;
    double domain_max = 1.0;

    // Number of basis functions (design columns).
    int dim() const;

    // Uniform basis of `dim` functions covering [a, b].
    static SplineBasis uniform(double a, double b, int dim);
    static SplineBasis cyclic(double a, double b, int dim);
};

// Design matrix of basis evaluations; x outside the domain is clamped and
// counted in *n_clamped when given.
Eigen::MatrixXd bspline_design(const std::vector<double>& x, const SplineBasis& basis,
                               int64_t* n_clamped = nullptr);

// Second-order difference penalty D2^T D2 (wrapping differences for cyclic).
Eigen::MatrixXd second_difference_penalty(int dim, bool cyclic);

struct PenalizedSolveInfo {
    double edf = 0.0;
    double rss = 0.0;
    double gcv = 0.0;
};

// argmin ||y - X b||^2 + lambda b^T P b via the normal equations (LDLT).
// Throws NumericError with a condition report when X^T X + lambda P is
// numerically singular.
Eigen::VectorXd fit_penalized(const Eigen::MatrixXd& X, const Eigen::MatrixXd& penalty,
                              double lambda, const Eigen::VectorXd& y,
                              PenalizedSolveInfo* info = nullptr);

// Precomputed cross-products, shared across the lambda grid.
struct NormalEquations {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    double yty = 0.0;
    int64_t n = 0;

    NormalEquations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
};

Eigen::VectorXd solve_penalized(const NormalEquations& ne, const Eigen::MatrixXd& penalty,
                                double lambda, PenalizedSolveInfo* info);

// Minimizes GCV = n*RSS/(n-edf)^2 over the grid; ties take the smaller lambda.
double select_lambda(const Eigen::MatrixXd& X, const Eigen::MatrixXd& penalty,
                     const Eigen::VectorXd& y, const std::vector<double>& grid);

// Default 13-point log-spaced grid 1e-4 .. 1e8.
std::vector<double> default_lambda_grid();

}  // namespace loadcast
