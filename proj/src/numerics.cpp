#include "sqrtsae/numerics.hpp"

#include "sqrtsae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sqrtsae::numerics {

double CubicCoefficients::abs_sum() const {
    return std::abs(c3) + std::abs(c2) + std::abs(c1) + std::abs(c0);
}

double cubic_residual_tolerance(const CubicCoefficients& c) {
    return 1e-10 * std::max(1.0, c.abs_sum());
}

namespace {

// Newton refinement; a step is kept only when it shrinks the residual.
double polish(const CubicCoefficients& c, double x, int max_steps) {
    double fx = c(x);
    for (int i = 0; i < max_steps && fx != 0.0; ++i) {
        const double d = c.derivative(x);
        if (d == 0.0 || !std::isfinite(d)) break;
        const double next = x - fx / d;
        const double fnext = c(next);
        if (!(std::abs(fnext) < std::abs(fx))) break;
        x = next;
        fx = fnext;
    }
    return x;
}

std::vector<double> collapse(std::vector<double> roots) {
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (!out.empty() && std::abs(r - out.back()) <= 1e-6 * std::max(1.0, std::abs(r))) {
            continue;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<double> solve_quadratic(double a, double b, double c) {
    if (a == 0.0) {
        if (b == 0.0) {
            if (c == 0.0) throw NumericError("polynomial is identically zero");
            return {};
        }
        return {-c / b};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    if (disc == 0.0) return {-b / (2.0 * a)};
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    std::vector<double> roots{q / a};
    if (q != 0.0) roots.push_back(c / q);
    else roots.push_back(-b / a - q / a);
    return collapse(std::move(roots));
}

}  // namespace

std::vector<double> solve_cubic_real(const CubicCoefficients& c) {
    if (!std::isfinite(c.c3) || !std::isfinite(c.c2) || !std::isfinite(c.c1) ||
        !std::isfinite(c.c0)) {
        throw NumericError("cubic coefficients must be finite");
    }
    if (c.c3 == 0.0) {
        auto roots = solve_quadratic(c.c2, c.c1, c.c0);
        for (double& r : roots) r = polish(c, r, 3);
        return roots;
    }

    const double a2 = c.c2 / c.c3;
    const double a1 = c.c1 / c.c3;
    const double a0 = c.c0 / c.c3;
    const double shift = a2 / 3.0;
    const double q = (a2 * a2 - 3.0 * a1) / 9.0;
    const double r = (2.0 * a2 * a2 * a2 - 9.0 * a2 * a1 + 27.0 * a0) / 54.0;
    const double q3 = q * q * q;

    std::vector<double> certain;
    std::vector<double> candidates;
    if (r * r < q3) {
        const double sq = std::sqrt(q);
        const double theta = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
        constexpr double two_pi = 2.0 * std::numbers::pi;
        certain = {-2.0 * sq * std::cos(theta / 3.0) - shift,
                   -2.0 * sq * std::cos((theta + two_pi) / 3.0) - shift,
                   -2.0 * sq * std::cos((theta - two_pi) / 3.0) - shift};
    } else {
        const double big_a = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q3)), r);
        const double big_b = big_a == 0.0 ? 0.0 : q / big_a;
        certain = {big_a + big_b - shift};
        // Real part of the conjugate pair; a real (double) root when the pair degenerates.
        candidates = {-0.5 * (big_a + big_b) - shift};
    }

    const double tol = cubic_residual_tolerance(c);
    std::vector<double> roots;
    for (double x : certain) roots.push_back(polish(c, x, 3));
    for (double x : candidates) {
        const double p = polish(c, x, 3);
        if (std::abs(c(p)) <= tol) roots.push_back(p);
    }
    return collapse(std::move(roots));
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

LinearSolution pseudo_solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs) {
    if (matrix.rows() != matrix.cols()) throw InputError("pseudo_solve needs a square matrix");
    if (matrix.rows() != rhs.size()) throw InputError("pseudo_solve: rhs length mismatch");
    if (!matrix.allFinite() || !rhs.allFinite()) {
        throw NumericError("pseudo_solve: non-finite entries");
    }
    const Eigen::Index n = matrix.rows();
    if (n == 0) return {Eigen::VectorXd(), false};

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) return {Eigen::VectorXd::Zero(n), true};

    if (sv(n - 1) / smax >= kRcondThreshold) {
        return {matrix.partialPivLu().solve(rhs), false};
    }
    Eigen::VectorXd coeffs = svd.matrixU().transpose() * rhs;
    for (Eigen::Index i = 0; i < n; ++i) {
        coeffs(i) = sv(i) > kRcondThreshold * smax ? coeffs(i) / sv(i) : 0.0;
    }
    return {svd.matrixV() * coeffs, true};
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& matrix) {
    if (!matrix.allFinite()) throw NumericError("pseudo_inverse: non-finite entries");
    if (matrix.size() == 0) return Eigen::MatrixXd(matrix.cols(), matrix.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (smax > 0.0 && sv(i) > kRcondThreshold * smax) inv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

LinearSolution least_squares_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    if (design.cols() == 0 || design.rows() < design.cols()) {
        throw InputError("least squares needs at least as many rows as columns");
    }
    if (design.rows() != response.size()) throw InputError("least squares: response length");
    if (!design.allFinite() || !response.allFinite()) {
        throw NumericError("least squares: non-finite entries");
    }
    const Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd xty = design.transpose() * response;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const auto& ev = eig.eigenvalues();  // ascending
    const double emax = ev(ev.size() - 1);
    if (emax <= 0.0) return {Eigen::VectorXd::Zero(design.cols()), true};
    if (std::max(0.0, ev(0)) / emax >= kRcondThreshold) {
        return {gram.ldlt().solve(xty), false};
    }
    Eigen::VectorXd coeffs = eig.eigenvectors().transpose() * xty;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        coeffs(i) = ev(i) > kRcondThreshold * emax ? coeffs(i) / ev(i) : 0.0;
    }
    return {eig.eigenvectors() * coeffs, true};
}

}  // namespace sqrtsae::numerics
