#include "qwo/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qwo/fft.hpp"

namespace qwo {
namespace {

void require_commensurate(double wavenumber, double length, const char* what) {
    const double turns = wavenumber * length / (2.0 * std::numbers::pi);
    if (std::abs(turns - std::round(turns)) > 1e-9 * std::max(1.0, std::abs(turns)))
        throw std::invalid_argument(std::string(what) +
                                    " is not commensurate with the periodic box (phase winds " +
                                    std::to_string(turns) + " times)");
}

// Multiplies by exp(i sum_a kappa_a q_a).
ComplexField plane_phase(const ComplexField& psi, const std::array<double, kMaxParticles>& kappa,
                         cplx global) {
    const auto& g = psi.grid();
    std::vector<std::vector<cplx>> ph(g.n_particles(), std::vector<cplx>(g.cells()));
    for (std::size_t a = 0; a < g.n_particles(); ++a)
        for (std::size_t j = 0; j < g.cells(); ++j) ph[a][j] = std::polar(1.0, kappa[a] * g.position(j));
    std::vector<cplx> out(psi.values().begin(), psi.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto idx = g.unravel(i);
        cplx f = global;
        for (std::size_t a = 0; a < g.n_particles(); ++a) f *= ph[a][idx[a]];
        out[i] *= f;
    }
    return ComplexField(g, std::move(out));
}

}  // namespace

double boost_quantum(const GridSpec& grid, double mass, double hbar) {
    return 2.0 * std::numbers::pi * hbar / (mass * grid.length());
}

ComplexField translate(const ComplexField& psi, double shift) {
    if (shift == 0.0) return psi;
    const auto& g = psi.grid();
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    const std::size_t n = g.cells();
    const std::size_t rank = g.n_particles();
    std::vector<cplx> ramp(n);
    for (std::size_t j = 0; j < n; ++j) ramp[j] = std::polar(1.0, -g.wavenumber(j) * shift);
    fft::transform(data, n, rank, fft::Direction::forward);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = g.unravel(i);
        cplx f = inv;
        for (std::size_t a = 0; a < rank; ++a) f *= ramp[idx[a]];
        data[i] *= f;
    }
    fft::transform(data, n, rank, fft::Direction::backward);
    return ComplexField(g, std::move(data));
}

ComplexField boost_wavefunction(const ComplexField& psi, double v, double t,
                                const HamiltonianSpec& h) {
    if (v == 0.0) return psi;
    const auto& g = psi.grid();
    std::array<double, kMaxParticles> kappa{};
    double energy = 0.0;
    for (std::size_t a = 0; a < g.n_particles(); ++a) {
        kappa[a] = h.masses[a] * v / h.hbar;
        require_commensurate(kappa[a], g.length(), "boost velocity");
        energy += 0.5 * h.masses[a] * v * v * t;
    }
    return plane_phase(translate(psi, v * t), kappa, std::polar(1.0, -energy / h.hbar));
}

double boost_commutation_defect(const ComplexField& phi, double v, double t, double x,
                                std::size_t axis, double sigma, const HamiltonianSpec& h) {
    const auto lhs = collapse_sqrt(boost_wavefunction(phi, v, t, h), axis, x + v * t, sigma);
    const auto rhs = boost_wavefunction(collapse_sqrt(phi, axis, x, sigma), v, t, h);
    std::vector<cplx> diff(lhs.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs[i] - rhs[i];
    return norm(ComplexField(phi.grid(), std::move(diff)));
}

FlashHistory boost_flashes(const FlashHistory& fh, double v, const std::optional<GridSpec>& grid) {
    std::vector<Flash> out;
    out.reserve(fh.size());
    for (auto f : fh.flashes()) {
        f.x += v * f.t;
        if (grid) f.x = grid->wrap(f.x);
        out.push_back(f);
    }
    return FlashHistory(std::move(out));
}

Trajectory boost_trajectory(const Trajectory& tr, double v, const GridSpec& grid) {
    Trajectory out = tr;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const Config u = tr.unwrapped(k, grid.length());
        for (std::size_t a = 0; a < tr.n_particles; ++a) {
            const double moved = u[a] + v * tr.times[k];
            out.configs[k][a] = grid.wrap(moved);
            out.windings[k][a] = std::lround((moved - out.configs[k][a]) / grid.length());
        }
    }
    return out;
}

std::pair<ComplexField, HamiltonianSpec> gauge_transform(const ComplexField& psi, double slope,
                                                         const HamiltonianSpec& h) {
    const auto& g = psi.grid();
    HamiltonianSpec out = h;
    if (slope == 0.0) return {psi, out};
    std::array<double, kMaxParticles> kappa{};
    out.vector_potential.assign(g.n_particles(), 0.0);
    for (std::size_t a = 0; a < g.n_particles(); ++a) {
        kappa[a] = h.charge(a) * slope / h.hbar;
        require_commensurate(kappa[a], g.length(), "gauge slope");
        out.vector_potential[a] = h.vector_potential_on(a) + slope;
    }
    return {plane_phase(psi, kappa, 1.0), out};
}

}  // namespace qwo
