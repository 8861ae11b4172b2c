#pragma once

// Reference computations written independently of the library formulas: brute-force
// expansions, bisection and grid search.

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

// Inputs back-solved from the reference area: the BP
// theoretical MSPE fixes (X beta)^2 and the proposed weight fixes b/t at t = 10.
inline constexpr double kA = 0.2;
inline constexpr double kBOverT10 = 0.6593622631345164;
inline constexpr double kB = kBOverT10 * 10.0;
inline constexpr double kXbetaSq = 390.0128;

// MSPE of {w Z + (1-w) Xh}^2 + C about lambda = theta^2, expanded from the joint normal
// moments of (theta, S) with theta ~ N(mu, a), S = w theta + w e + (1-w) (mu + d),
// e ~ N(0, 1/4), d ~ N(0, c). Uses E[X^2 Y^2] for jointly normal X, Y and the unbiasing
// constant C = a - Var(S) - (E S)^2 + mu^2, i.e. the constant that zeroes the bias.
inline double mspe_moments(double w, double mu, double a, double c) {
    const double var_s = w * w * (a + 0.25) + (1 - w) * (1 - w) * c;
    const double cov = w * a;
    // E[S^2 theta^2] for jointly normal with common mean mu
    const double e_s2 = mu * mu + var_s;
    const double e_t2 = mu * mu + a;
    const double e_s4 = std::pow(mu, 4) + 6 * mu * mu * var_s + 3 * var_s * var_s;
    const double e_t4 = std::pow(mu, 4) + 6 * mu * mu * a + 3 * a * a;
    const double e_s2t2 = std::pow(mu, 4) + mu * mu * (var_s + a + 4 * cov) + var_s * a + 2 * cov * cov;
    const double cst = e_t2 - e_s2;
    // E[(S^2 + C - T^2)^2]
    return e_s4 + e_t4 + cst * cst - 2 * e_s2t2 + 2 * cst * e_s2 - 2 * cst * e_t2;
}

// Bisection on a sign change; the midpoint after shrinking below tol.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-14) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Argmin of f over a uniform grid on [0,1].
inline double grid_argmin(const std::function<double(double)>& f, double step) {
    const int n = static_cast<int>(std::lround(1.0 / step));
    double best_w = 0.0;
    double best = f(0.0);
    for (int k = 1; k <= n; ++k) {
        const double w = static_cast<double>(k) / n;
        const double v = f(w);
        if (v < best) {
            best = v;
            best_w = w;
        }
    }
    return best_w;
}

// Simpson integration of the standard normal density over [lo, hi].
inline double normal_mass(double lo, double hi, int intervals = 20000) {
    const double h = (hi - lo) / intervals;
    auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); };
    double s = pdf(lo) + pdf(hi);
    for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4 : 2) * pdf(lo + k * h);
    return s * h / 3;
}

}  // namespace oracle
