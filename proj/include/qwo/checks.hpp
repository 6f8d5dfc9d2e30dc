#pragma once

// Ensemble experiments: equivariance, generalized equivariance, ensemble
// discrimination and GRWm/GRWf readout agreement.

#include <cstdint>
#include <vector>

#include "qwo/bohm.hpp"
#include "qwo/grw.hpp"
#include "qwo/ontology.hpp"
#include "qwo/stats.hpp"

namespace qwo {

// Q0 ~ |psi0|^2, integrate to t, KS per axis against the marginals of psi_t.
std::vector<TestReport> check_bm_equivariance(const ComplexField& psi0, const Propagator& prop,
                                              double t, std::size_t n, std::uint64_t seed,
                                              double dt = 0.01,
                                              Interpolation mode = Interpolation::multilinear);

enum class CollapseTheory { grwf, grwm };

struct GeneralizedEquivarianceOptions {
    CollapseTheory theory = CollapseTheory::grwf;
    double t_shift = 0.5;
    std::size_t n = 3000;
    std::uint64_t seed = 1;
    // Restart from the linearly evolved psi and ignore the past (negative control).
    bool restart_from_linear = false;
    // grwm: time after the shift at which the region mass is compared.
    double probe_delay = 0.5;
    Region probe_region{"A", -1e300, 0.0};
};

// A: flashes after t_shift of full runs from psi0, shifted by -t_shift.
// B: fresh runs from collapsed states harvested at t_shift by independent runs.
// grwf compares first post-shift flash time, location and its displacement
// from the last pre-shift flash; grwm compares the probe-region mass.
TestReport check_generalized_equivariance(const ComplexField& psi0, const Propagator& prop,
                                          const TheoryParams& params,
                                          const GeneralizedEquivarianceOptions& options);

struct EnsembleMember {
    double weight;
    ComplexField psi;
};
using EnsembleSpec = std::vector<EnsembleMember>;

// max |rho - rho'| entrywise (dx^N-weighted) for grids up to 1024 cells,
// random quadratic-form probes otherwise.
double density_matrix_distance(const EnsembleSpec& a, const EnsembleSpec& b, std::uint64_t seed = 99);

enum class DiscriminationBranch { grwf, grwm_single_time };

struct DiscriminationOptions {
    DiscriminationBranch branch = DiscriminationBranch::grwf;
    std::size_t n = 5000;
    std::uint64_t seed = 3;
    Region region{"A", -1e300, 0.0};
};

// grwf: pass = first-flash (t, x) laws not distinguishable.
// grwm_single_time: pass = region mass at t0 classifies every draw correctly.
TestReport density_matrix_discrimination(const EnsembleSpec& mu, const EnsembleSpec& mu_prime,
                                         const Propagator& prop, const TheoryParams& params,
                                         const DiscriminationOptions& options);

struct EquivalenceOptions {
    std::size_t n_runs = 500;
    std::uint64_t seed = 5;
    double t_max = 5.0;
    ReadoutSpec readout;
};

// Per run one collapse realization read out both from its flashes and from
// its m-field; pass = agreement >= 0.99 with no A-vs-B contradictions.
TestReport check_grwm_grwf_empirical_equivalence(const ComplexField& psi0, const Propagator& prop,
                                                 const TheoryParams& params,
                                                 const EquivalenceOptions& options);

}  // namespace qwo
