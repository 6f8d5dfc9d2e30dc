#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "qwo/grid.hpp"

namespace qwo {

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Seed of the independent stream number `index` under `master`:
//   splitmix64(splitmix64(master) + index * 0x9E3779B97F4A7C15).
// This construction is part of the output format and must stay stable.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

// Random source owned by exactly one run. Variates are produced from raw
// 64-bit words by fixed formulas, so streams are portable across standard
// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        return Rng(stream_seed(master, index));
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate);
    double normal();
    // Index drawn with probability proportional to weights (one uniform).
    std::size_t discrete(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
};

// Picks cell k with probability proportional to weights[k] given a uniform u.
std::size_t inverse_cdf_cell(std::span<const double> weights, double u);

// Draws a position from a gridded density. The density is read as constant
// on each cell [x_k - dx/2, x_k + dx/2), so the CDF is linear inside cells:
// one uniform selects the cell, a second places the point inside it.
// Result lies in [origin, origin + L).
double sample_density(const RealField1D& f, Rng& rng);

// Piecewise-linear CDF of a gridded density (cells centred on grid points),
// evaluated at x (periodic; x is first wrapped into the domain and the CDF
// starts at origin - dx/2 folded onto the top cell).
double density_cdf(const RealField1D& f, double x);

}  // namespace qwo
