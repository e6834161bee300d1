#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qmc {

// Thin wrapper around mt19937_64 producing bit-reproducible streams across
// platforms.  std::normal_distribution / std::uniform_real_distribution are
// implementation-defined, so the transforms live here instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, m)
    std::uint64_t uniform_int(std::uint64_t m) {
        // Lemire-style rejection to avoid modulo bias.
        std::uint64_t threshold = (-m) % m;
        for (;;) {
            std::uint64_t r = eng_();
            if (r >= threshold) return r % m;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller (cached second deviate)
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace qmc
