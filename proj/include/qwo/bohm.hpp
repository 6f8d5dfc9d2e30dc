#pragma once

// Bohmian velocity field, trajectory integration, equilibrium sampling and
// the collapsed-wave-function form of the guidance law.

#include <functional>
#include <vector>

#include "qwo/dynamics.hpp"
#include "qwo/grid.hpp"
#include "qwo/sampling.hpp"

namespace qwo {

// How psi and its gradient are evaluated off the grid.
//   multilinear: interpolate the grid values of psi and of its spectral gradient
//   spectral:    evaluate the band-limited Fourier interpolant (exact for
//                resolved fields, O(grid size) per point)
enum class Interpolation { multilinear, spectral };

struct LocalAmplitude {
    cplx psi{};
    std::array<cplx, kMaxParticles> grad{};
};

// One wave function prepared for repeated off-grid evaluation.
class PsiSnapshot {
public:
    PsiSnapshot(const ComplexField& psi, Interpolation mode = Interpolation::multilinear);

    const GridSpec& grid() const { return grid_; }
    Interpolation mode() const { return mode_; }
    // ||psi||^2 / L^N, the reference for the node floor.
    double mean_density() const { return mean_density_; }
    LocalAmplitude evaluate(const Config& q) const;

private:
    LocalAmplitude multilinear(const Config& q) const;
    LocalAmplitude spectral(const Config& q) const;

    GridSpec grid_;
    Interpolation mode_;
    double mean_density_;
    std::vector<cplx> psi_;                 // multilinear: grid values
    std::vector<std::vector<cplx>> grad_;   // multilinear: per-axis gradients
    std::vector<cplx> spectrum_;            // spectral: DFT / size
};

// Relative node floor: |psi(q)|^2 below floor * mean density stalls.
inline constexpr double kNodeFloor = 1e-10;

// v_i = (hbar/m_i) Im(d_i psi / psi) - e_i A_i / m_i. NumericalFailure near nodes.
Config velocity_from(const LocalAmplitude& a, double mean_density, const HamiltonianSpec& h,
                     std::size_t n_particles);

Config bohm_velocity(const ComplexField& psi, const Config& q, const HamiltonianSpec& h,
                     Interpolation mode = Interpolation::multilinear);

// Time-indexed psi: snapshots at increasing times, linear in time between them.
class PsiPath {
public:
    PsiPath() = default;
    void push(double t, const ComplexField& psi, Interpolation mode);
    void push(double t, PsiSnapshot snapshot);

    // Unitary path on [t0, t_max] with checkpoints every `spacing` (last one
    // at t_max exactly).
    static PsiPath unitary(const ComplexField& psi0, const Propagator& prop, double t0,
                           double t_max, double spacing,
                           Interpolation mode = Interpolation::multilinear);

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }
    const GridSpec& grid() const { return snaps_.front().grid(); }

    Config velocity(double t, const Config& q, const HamiltonianSpec& h) const;

private:
    std::vector<double> times_;
    std::vector<PsiSnapshot> snaps_;
};

// Configurations are stored wrapped into the domain, with the number of
// times each coordinate crossed the boundary.
struct Trajectory {
    std::size_t n_particles = 1;
    std::vector<double> times;
    std::vector<Config> configs;
    std::vector<std::array<long, kMaxParticles>> windings;

    std::size_t size() const { return times.size(); }
    Config unwrapped(std::size_t k, double length) const;
};

using VelocityField = std::function<Config(double t, const Config& q)>;

// Classical RK4 with step <= dt landing exactly on t_max.
Trajectory integrate_trajectory(const VelocityField& v, const GridSpec& grid, const Config& q0,
                                double t0, double t_max, double dt);
Trajectory integrate_trajectory(const PsiPath& path, const HamiltonianSpec& h, const Config& q0,
                                double t0, double t_max, double dt);

// Draws Q ~ |psi|^2 axis by axis (cell by inverse CDF, then a uniform
// offset inside the cell), two uniforms per axis.
class EquilibriumSampler {
public:
    explicit EquilibriumSampler(const ComplexField& psi);
    Config draw(Rng& rng) const;

private:
    GridSpec grid_;
    std::vector<double> density_;
};

Config sample_equilibrium(const ComplexField& psi, Rng& rng);

// psi^C(q) = exp(-sum_i d_i^2 / 2 sigma^2) psi(q), d_i the minimal-image q_i - Q_i.
ComplexField bmc_transform(const ComplexField& psi, const Config& Q, double sigma);

Config bmc_velocity(const ComplexField& psiC, const Config& Q, const HamiltonianSpec& h,
                    Interpolation mode = Interpolation::multilinear);

// L2 norm of i hbar d_t psi^C - H~ psi^C at the middle of three equally
// spaced times, with d_t a central difference of step dt. H~ carries the
// imaginary pseudo-potentials A~_i = (i/sigma^2)(q_i - Q_i) and
// V~ = (i/sigma^2) sum_i (hbar^2/m_i)(q_i - Q_i) Im(d_i psi^C / psi^C)(Q).
struct BmcTriple {
    ComplexField prev, mid, next;  // psi^C at t - dt, t, t + dt
    Config Q;                      // configuration at t
};
double bmc_pde_residual(const BmcTriple& c, double dt, double sigma, const Propagator& prop);

}  // namespace qwo
