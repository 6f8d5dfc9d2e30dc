#pragma once

// Nonrelativistic Hamiltonians on the periodic grid and their unitary
// propagation by Strang split-step Fourier:
//   U(tau) ~ K(tau/2) V(tau) K(tau/2),  K = kinetic phase in momentum space.

#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "qwo/grid.hpp"

namespace qwo {

struct FreePotential {
    friend bool operator==(const FreePotential&, const FreePotential&) = default;
};

// V_i(q) = m_i omega_i^2 d^2 / 2 with d the minimal-image distance to center.
struct HarmonicPotential {
    std::vector<double> omega;  // one per axis
    std::optional<double> center;  // default: middle of the box
    friend bool operator==(const HarmonicPotential&, const HarmonicPotential&) = default;
};

// V_i(q) = barrier * ((d / a)^2 - 1)^2, a = separation / 2.
struct DoubleWellPotential {
    double barrier = 1.0;
    double separation = 2.0;
    std::optional<double> center;
    friend bool operator==(const DoubleWellPotential&, const DoubleWellPotential&) = default;
};

// Arbitrary real potential on the full configuration grid.
struct TabulatedPotential {
    std::vector<double> values;
    friend bool operator==(const TabulatedPotential&, const TabulatedPotential&) = default;
};

using Potential =
    std::variant<FreePotential, HarmonicPotential, DoubleWellPotential, TabulatedPotential>;

struct HamiltonianSpec {
    std::vector<double> masses;
    double hbar = 1.0;
    Potential potential = FreePotential{};
    // Spatially constant vector potential per axis; empty means absent.
    std::vector<double> vector_potential;
    // Charges e_k; empty means all 1.
    std::vector<double> charges;
    // Largest Strang substep; unset means 0.05 * hbar / max|V|.
    std::optional<double> max_step;
    // Added to every potential value (a constant energy shift).
    double energy_offset = 0.0;

    double charge(std::size_t axis) const { return charges.empty() ? 1.0 : charges[axis]; }
    double vector_potential_on(std::size_t axis) const {
        return vector_potential.empty() ? 0.0 : vector_potential[axis];
    }
    friend bool operator==(const HamiltonianSpec&, const HamiltonianSpec&) = default;
};

inline HamiltonianSpec with_masses(std::vector<double> masses) {
    HamiltonianSpec h;
    h.masses = std::move(masses);
    return h;
}

// Precomputed potential tables and kinetic wavenumbers for one grid.
class Propagator {
public:
    Propagator(GridSpec grid, HamiltonianSpec spec);

    const GridSpec& grid() const { return grid_; }
    const HamiltonianSpec& spec() const { return spec_; }
    double max_step() const { return max_step_; }
    bool separable() const { return !axis_potential_.empty(); }
    bool free() const { return free_; }
    std::span<const double> potential() const { return potential_; }

    // U(duration) psi; duration may be negative.
    ComplexField evolve(const ComplexField& psi, double duration) const;

    // Applies the single-particle propagator for durations[i] along axis i.
    // Requires a noninteracting Hamiltonian.
    ComplexField evolve_axes(const ComplexField& psi, std::span<const double> durations) const;

    // <psi|H psi> / <psi|psi>.
    double expected_energy(const ComplexField& psi) const;

    // Kinetic energy of wavenumber k on an axis: (hbar k - e A)^2 / 2m.
    double kinetic(std::size_t axis, double k) const;

private:
    void strang_full(std::vector<cplx>& data, double tau, std::size_t steps) const;
    void strang_axis(std::vector<cplx>& data, std::size_t axis, double tau,
                     std::size_t steps) const;
    std::size_t substeps(double duration) const;

    GridSpec grid_;
    HamiltonianSpec spec_;
    std::vector<double> potential_;                    // full grid
    std::vector<std::vector<double>> axis_potential_;  // per axis when separable
    double max_step_ = std::numeric_limits<double>::infinity();
    bool free_ = true;
};

// Convenience wrappers that build a Propagator per call.
ComplexField evolve(const ComplexField& psi, const HamiltonianSpec& h, double dt);
ComplexField multi_time_evolve(const ComplexField& psi0, const HamiltonianSpec& h,
                               std::span<const double> times);
double expected_energy(const ComplexField& psi, const HamiltonianSpec& h);

// Potential energy V(q) on the full grid (including energy_offset).
std::vector<double> tabulate_potential(const GridSpec& grid, const HamiltonianSpec& h);

}  // namespace qwo
