#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sqrtsae::numerics {

// c3*x^3 + c2*x^2 + c1*x + c0
struct CubicCoefficients {
    double c3 = 0.0;
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;

    double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
    double derivative(double x) const { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }
    double abs_sum() const;
};

// Distinct real roots in ascending order. Closed-form roots are polished by Newton steps
// and each returned root r satisfies |p(r)| <= 1e-10 * max(1, |c3|+|c2|+|c1|+|c0|).
// A zero leading coefficient drops to the quadratic or linear formula (which may return no
// roots). Throws NumericError on non-finite input or the identically-zero polynomial.
std::vector<double> solve_cubic_real(const CubicCoefficients& c);

// Residual bound used by solve_cubic_real.
double cubic_residual_tolerance(const CubicCoefficients& c);

double normal_cdf(double x);

// Matrices with reciprocal condition number below this are solved by pseudo-inverse.
inline constexpr double kRcondThreshold = 1e-12;

struct LinearSolution {
    Eigen::VectorXd x;
    bool used_pseudo_inverse = false;
};

// Moore-Penrose solve of a square system. A well-conditioned matrix goes through LU,
// otherwise singular values below kRcondThreshold * sigma_max are discarded.
LinearSolution pseudo_solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs);

// Ordinary least squares through the normal equations; minimum-norm answer when
// X'X is numerically singular.
LinearSolution least_squares_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

// Full Moore-Penrose inverse (for hat-matrix leverages).
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& matrix);

}  // namespace sqrtsae::numerics
