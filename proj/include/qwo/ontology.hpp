#pragma once

// Primitive ontologies (matter density, flashes, configurations) and the
// variant theories built on the same machinery.

#include <optional>
#include <string>
#include <vector>

#include "qwo/bohm.hpp"
#include "qwo/grw.hpp"

namespace qwo {

// m(x, t) on a time grid; values are time-major (times.size() rows of cells).
struct MatterDensity {
    std::vector<double> times;
    std::size_t cells = 0;
    double length = 0.0;
    double origin = 0.0;
    std::vector<double> values;

    RealField1D slice(std::size_t k) const;
    void append(double t, const RealField1D& m);
};

// sum_i m_i marginal(psi, i).
RealField1D matter_density(const ComplexField& psi, std::span<const double> masses);

struct GrwmRun {
    MatterDensity density;
    FlashHistory flashes;  // the collapse centres of the same realization
};

GrwmRun run_grwm(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                 const TheoryParams& params, Rng& rng, const GrwOptions& options = {});

MatterDensity run_sm(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                     std::size_t checkpoints = 20);

// Flashes at the collapse rate of the unitarily evolving psi; psi is never
// collapsed. sigma_zero samples centres from lambda_i marginal(psi_t, i).
FlashHistory run_sf(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                    const TheoryParams& params, Rng& rng, bool sigma_zero = false,
                    std::optional<std::size_t> max_flashes = std::nullopt);

struct SfPrimeRun {
    FlashHistory history;
    std::vector<double> seeds;  // virtual flash positions at t0, one per label
};

// Density in x of |psi(X_1, T_1, ..., x, T, ..., X_N, T_N)|^2 for the given
// label, other coordinates fixed at `others`, normalized to integrate to 1.
RealField1D multi_time_conditional(const ComplexField& psi0, const Propagator& prop,
                                   std::size_t axis, std::span<const double> durations,
                                   const Config& others);

SfPrimeRun run_sf_prime(const ComplexField& psi0, double t0, double t_max,
                        const Propagator& prop, const TheoryParams& params, Rng& rng,
                        std::optional<std::size_t> max_flashes = std::nullopt);

struct GrwpRun {
    Trajectory trajectory;
    FlashHistory flashes;
    ComplexField final_state;
};

GrwpRun run_grwp(const ComplexField& psi0, const Config& q0, double t0, double t_max,
                 const Propagator& prop, const TheoryParams& params, Rng& rng, double dt,
                 Interpolation mode = Interpolation::multilinear);

// Independent draws from |psi_t|^2 at each sample time.
std::vector<Config> run_bmw(const ComplexField& psi0, double t0,
                            std::span<const double> sample_times, const Propagator& prop,
                            Rng& rng);

struct Region {
    std::string name;
    double lo = 0.0;  // [lo, hi)
    double hi = 0.0;
    friend bool operator==(const Region&, const Region&) = default;
};

struct ReadoutSpec {
    std::vector<Region> regions;
    double window_begin = 0.0;
    double window_end = 0.0;
    double dominance = 0.6;

    void validate() const;
};

// nullopt means Abstain.
using Readout = std::optional<std::string>;

Readout pointer_readout(const FlashHistory& flashes, const ReadoutSpec& spec);
// Uses the last time slice at or before window_end.
Readout pointer_readout(const MatterDensity& m, const ReadoutSpec& spec);
// Mass-weighted share of particles in each region at window_end.
Readout pointer_readout(const Trajectory& tr, const ReadoutSpec& spec,
                        std::span<const double> masses);

}  // namespace qwo
