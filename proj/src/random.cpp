#include "sqrtsae/random.hpp"

#include "sqrtsae/errors.hpp"

#include <cmath>
#include <numbers>

namespace sqrtsae {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t substream) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(substream),
                         static_cast<std::uint32_t>(substream >> 32)};
}

constexpr std::int64_t kStirlingCutoff = 20;

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t substream) {
    auto seq = make_seed_seq(seed, substream);
    engine_.seed(seq);
}

double RandomStream::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::int64_t RandomStream::poisson(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InputError("poisson mean must be finite and >= 0");
    }
    if (lambda == 0.0) return 0;
    return lambda < 30.0 ? poisson_inversion(lambda) : poisson_ptrs(lambda);
}

std::int64_t RandomStream::poisson_inversion(double lambda) {
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    std::int64_t k = 0;
    // The tail beyond k = 200 has mass below 1e-100 for lambda < 30.
    while (u > cdf && k < 200) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson random variables".
std::int64_t RandomStream::poisson_ptrs(double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    while (true) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -lambda + static_cast<double>(k) * loglam - log_factorial(k)) {
            return k;
        }
    }
}

double log_factorial(std::int64_t k) {
    if (k < 0) throw InputError("log_factorial of a negative integer");
    if (k < kStirlingCutoff) {
        double s = 0.0;
        for (std::int64_t i = 2; i <= k; ++i) s += std::log(static_cast<double>(i));
        return s;
    }
    // Stirling series; truncation error below 1e-16 for n >= 20.
    const double n = static_cast<double>(k);
    const double inv = 1.0 / n;
    const double inv2 = inv * inv;
    return (n + 0.5) * std::log(n) - n + 0.5 * std::log(2.0 * std::numbers::pi) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

}  // namespace sqrtsae
