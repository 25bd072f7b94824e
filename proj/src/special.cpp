#include "scclg/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace scclg {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

}  // namespace

double log_gamma(double x) {
    using std::numbers::pi;
    if (x < 0.5) {
        return std::log(pi / std::abs(std::sin(pi * x))) - log_gamma(1.0 - x);
    }
    x -= 1.0;
    double a = kLanczosCoef[0];
    for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) a += kLanczosCoef[i] / (x + static_cast<double>(i));
    const double t = x + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

double digamma(double x) {
    using std::numbers::pi;
    if (x <= 0.0 && x == std::floor(x)) return std::nan("");
    if (x < 0.0) return digamma(1.0 - x) - pi / std::tan(pi * x);
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // Asymptotic series in 1/x^2 (Bernoulli numbers).
    const double tail = 1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760);
    const double series = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * tail)));
    return acc + std::log(x) - 0.5 * inv - series;
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace scclg
