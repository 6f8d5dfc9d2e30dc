#include "qwo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qwo {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) + index * 0x9E3779B97F4A7C15ULL);
}

double Rng::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log1p(-uniform()) / rate;
}

double Rng::normal() {
    // Box-Muller; both uniforms always consumed.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::discrete(std::span<const double> weights) {
    return inverse_cdf_cell(weights, uniform());
}

std::size_t inverse_cdf_cell(std::span<const double> weights, double u) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("negative or non-finite weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::invalid_argument("all-zero density");
    const double target = u * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] > 0.0) last_positive = k;
        acc += weights[k];
        if (target < acc && weights[k] > 0.0) return k;
    }
    return last_positive;
}

double sample_density(const RealField1D& f, Rng& rng) {
    const std::size_t k = inverse_cdf_cell(f.values, rng.uniform());
    const double offset = rng.uniform() - 0.5;
    const double dx = f.dx();
    double x = f.origin + (static_cast<double>(k) + offset) * dx;
    if (x < f.origin) x += f.length;
    if (x >= f.origin + f.length) x -= f.length;
    return x;
}

double density_cdf(const RealField1D& f, double x) {
    const std::size_t n = f.cells;
    double r = std::fmod(x - f.origin, f.length);
    if (r < 0.0) r += f.length;
    const double s = r / f.dx();
    double total = 0.0;
    for (double v : f.values) total += v;
    if (!(total > 0.0)) throw std::invalid_argument("density_cdf: all-zero density");
    const auto& p = f.values;
    double acc;
    if (s < 0.5) {
        acc = p[0] * s;
    } else {
        const auto m = static_cast<std::size_t>(std::floor(s + 0.5));
        acc = 0.5 * p[0];
        for (std::size_t k = 1; k < m && k < n; ++k) acc += p[k];
        acc += p[m % n] * (s - (static_cast<double>(m) - 0.5));
    }
    return std::min(1.0, acc / total);
}

}  // namespace qwo
