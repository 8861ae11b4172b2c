#pragma once

#include <cstdint>
#include <random>

namespace sqrtsae {

// Deterministic sampler keyed by (seed, substream). The transforms from raw 64-bit words
// are written out here instead of using <random> distributions, whose algorithms are
// implementation-defined, so a given key yields the same draws on every platform.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t substream);

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    // Inversion below lambda = 30, PTRS transformed rejection above.
    std::int64_t poisson(double lambda);

private:
    std::int64_t poisson_inversion(double lambda);
    std::int64_t poisson_ptrs(double lambda);

    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// log(k!) without touching the global signgam that std::lgamma writes.
double log_factorial(std::int64_t k);

}  // namespace sqrtsae
