#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace migplan {

// Sampling is built on mt19937_64 plus explicit transforms, so a given seed
// produces the same stream on every standard library. Substream seeds are
// derived with splitmix64 so sharding scenarios across workers cannot change
// the result.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= index * 0xD1B54A32D192ED03ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ b;
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    // Box-Muller.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Inversion.
    double weibull(double shape, double scale) {
        return scale * std::pow(-std::log(1.0 - uniform()), 1.0 / shape);
    }

    // exp(sigma Z - sigma^2/2): multiplicative noise with mean exactly 1.
    double lognormal_mean1(double sigma) {
        return std::exp(sigma * normal() - 0.5 * sigma * sigma);
    }

    // Marsaglia-Tsang for shape >= 1, boosted below 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform_pos(), 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0) continue;
            v = v * v * v;
            double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    double beta(double a, double b) {
        double g1 = gamma(a);
        double g2 = gamma(b);
        return g1 / (g1 + g2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace migplan
