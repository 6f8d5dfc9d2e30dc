#pragma once

// Galilean boosts and constant-slope gauge transformations.
//
// On the periodic domain the boost phase exp(i m v q / hbar) is single valued
// only when m v L / hbar is a multiple of 2 pi; likewise e s L / hbar for a
// gauge slope s. Other values are rejected.

#include <optional>
#include <utility>

#include "qwo/bohm.hpp"
#include "qwo/grw.hpp"

namespace qwo {

// Smallest boost velocity allowed for a particle of the given mass.
double boost_quantum(const GridSpec& grid, double mass, double hbar);

// psi~(q) = exp((i/hbar) sum_i m_i (q_i v - v^2 t / 2)) psi(q - v t), the shift
// done by a Fourier phase ramp.
ComplexField boost_wavefunction(const ComplexField& psi, double v, double t,
                                const HamiltonianSpec& h);

// Spectral translation of every coordinate by `shift`.
ComplexField translate(const ComplexField& psi, double shift);

// || Lambda_i(x + v t)^{1/2} G_t phi - G_t Lambda_i(x)^{1/2} phi ||
double boost_commutation_defect(const ComplexField& phi, double v, double t, double x,
                                std::size_t axis, double sigma, const HamiltonianSpec& h);

// x -> x + v t for every flash; wrapped into the grid when one is given.
FlashHistory boost_flashes(const FlashHistory& fh, double v,
                           const std::optional<GridSpec>& grid = std::nullopt);
Trajectory boost_trajectory(const Trajectory& tr, double v, const GridSpec& grid);

// psi -> exp(i sum_k e_k f(q_k) / hbar) psi and A -> A + f' for f(x) = slope * x.
std::pair<ComplexField, HamiltonianSpec> gauge_transform(const ComplexField& psi, double slope,
                                                         const HamiltonianSpec& h);

}  // namespace qwo
