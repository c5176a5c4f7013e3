#include "mrs/poisson_variate.hpp"

#include <cmath>
#include <string>

#include "mrs/error.hpp"

namespace mrs {

namespace {

std::int64_t inversion(double rate, Rng& rng) {
    const double p0 = std::exp(-rate);
    for (;;) {
        const double u = rng.uniform();
        double pmf = p0;
        double cdf = p0;
        std::int64_t k = 0;
        while (u > cdf) {
            ++k;
            pmf *= rate / static_cast<double>(k);
            cdf += pmf;
            // cdf stalls below u only through rounding; redraw.
            if (k > 200) break;
        }
        if (u <= cdf) return k;
    }
}

// W. Hormann, "The transformed rejection method for generating Poisson
// random variables", Insurance: Mathematics and Economics 12 (1993).
std::int64_t transformed_rejection(double rate, Rng& rng) {
    const double log_rate = std::log(rate);
    const double b = 0.931 + 2.53 * std::sqrt(rate);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = -rate + k * log_rate - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::int64_t>(k);
    }
}

} // namespace

std::int64_t poisson_variate(double rate, Rng& rng) {
    if (!std::isfinite(rate) || rate < 0.0)
        throw InvalidArgument("poisson_variate: rate must be finite and non-negative, got " + std::to_string(rate));
    if (rate == 0.0) return 0;
    return rate < 10.0 ? inversion(rate, rng) : transformed_rejection(rate, rng);
}

} // namespace mrs
