#include "qwo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qwo/fft.hpp"

namespace qwo {
namespace {

void validate(const GridSpec& grid, const HamiltonianSpec& h) {
    const std::size_t n = grid.n_particles();
    if (h.masses.size() != n) throw std::invalid_argument("hamiltonian: need one mass per particle");
    for (double m : h.masses)
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("hamiltonian: masses must be positive");
    if (!(h.hbar > 0.0)) throw std::invalid_argument("hamiltonian: hbar must be positive");
    if (!h.vector_potential.empty() && h.vector_potential.size() != n)
        throw std::invalid_argument("hamiltonian: vector_potential needs one value per axis");
    if (!h.charges.empty() && h.charges.size() != n)
        throw std::invalid_argument("hamiltonian: charges needs one value per particle");
    if (h.max_step && !(*h.max_step > 0.0))
        throw std::invalid_argument("hamiltonian: max_step must be positive");
}

double default_center(const GridSpec& g, const std::optional<double>& c) {
    return c.value_or(g.origin() + 0.5 * g.length());
}

// Per-axis potential tables for the separable potential kinds.
std::vector<std::vector<double>> axis_tables(const GridSpec& g, const HamiltonianSpec& h) {
    const std::size_t n = g.cells();
    std::vector<std::vector<double>> tables(g.n_particles(), std::vector<double>(n, 0.0));
    std::visit(
        [&](const auto& pot) {
            using T = std::decay_t<decltype(pot)>;
            if constexpr (std::is_same_v<T, HarmonicPotential>) {
                if (pot.omega.size() != g.n_particles())
                    throw std::invalid_argument("harmonic potential needs one omega per axis");
                const double c = default_center(g, pot.center);
                for (std::size_t a = 0; a < g.n_particles(); ++a)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double d = g.periodic_delta(g.position(j), c);
                        tables[a][j] = 0.5 * h.masses[a] * pot.omega[a] * pot.omega[a] * d * d;
                    }
            } else if constexpr (std::is_same_v<T, DoubleWellPotential>) {
                if (!(pot.separation > 0.0)) throw std::invalid_argument("double well separation must be positive");
                const double c = default_center(g, pot.center);
                const double half = 0.5 * pot.separation;
                for (std::size_t a = 0; a < g.n_particles(); ++a)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double d = g.periodic_delta(g.position(j), c) / half;
                        tables[a][j] = pot.barrier * (d * d - 1.0) * (d * d - 1.0);
                    }
            }
        },
        h.potential);
    return tables;
}

// Additive decomposition of a tabulated potential, if it has one.
std::vector<std::vector<double>> separate(const GridSpec& g, std::span<const double> v) {
    const std::size_t np = g.n_particles();
    const std::size_t n = g.cells();
    std::vector<std::vector<double>> tables(np, std::vector<double>(n));
    const double v0 = v[0];
    for (std::size_t a = 0; a < np; ++a)
        for (std::size_t j = 0; j < n; ++j) tables[a][j] = v[j * g.stride(a)] - (a == 0 ? 0.0 : v0);
    double scale = 1.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto idx = g.unravel(i);
        double s = 0.0;
        for (std::size_t a = 0; a < np; ++a) s += tables[a][idx[a]];
        if (std::abs(s - v[i]) > 1e-12 * scale) return {};
    }
    return tables;
}

}  // namespace

std::vector<double> tabulate_potential(const GridSpec& g, const HamiltonianSpec& h) {
    std::vector<double> v(g.size(), 0.0);
    if (const auto* tab = std::get_if<TabulatedPotential>(&h.potential)) {
        if (tab->values.size() != g.size())
            throw std::invalid_argument("tabulated potential size does not match grid");
        v = tab->values;
    } else if (!std::holds_alternative<FreePotential>(h.potential)) {
        const auto tables = axis_tables(g, h);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto idx = g.unravel(i);
            for (std::size_t a = 0; a < g.n_particles(); ++a) v[i] += tables[a][idx[a]];
        }
    }
    for (double x : v)
        if (!std::isfinite(x)) throw std::invalid_argument("potential has non-finite values");
    for (auto& x : v) x += h.energy_offset;
    return v;
}

Propagator::Propagator(GridSpec grid, HamiltonianSpec spec)
    : grid_(grid), spec_(std::move(spec)) {
    validate(grid_, spec_);
    potential_ = tabulate_potential(grid_, spec_);
    if (std::holds_alternative<TabulatedPotential>(spec_.potential)) {
        std::vector<double> bare(potential_);
        for (auto& x : bare) x -= spec_.energy_offset;
        axis_potential_ = separate(grid_, bare);
    } else {
        axis_potential_ = axis_tables(grid_, spec_);
    }
    if (!axis_potential_.empty()) axis_potential_[0] = [&] {
        auto t = axis_potential_[0];
        for (auto& x : t) x += spec_.energy_offset;
        return t;
    }();

    double vmax = 0.0;
    for (double x : potential_) vmax = std::max(vmax, std::abs(x - spec_.energy_offset));
    free_ = vmax == 0.0;
    if (spec_.max_step) max_step_ = *spec_.max_step;
    else if (!free_) max_step_ = 0.05 * spec_.hbar / vmax;
}

double Propagator::kinetic(std::size_t axis, double k) const {
    const double p = spec_.hbar * k - spec_.charge(axis) * spec_.vector_potential_on(axis);
    return p * p / (2.0 * spec_.masses[axis]);
}

std::size_t Propagator::substeps(double duration) const {
    if (free_) return 1;
    const double n = std::ceil(std::abs(duration) / max_step_);
    return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

void Propagator::strang_full(std::vector<cplx>& data, double tau, std::size_t steps) const {
    const auto& g = grid_;
    const std::size_t n = g.cells();
    const std::size_t rank = g.n_particles();
    const double hbar = spec_.hbar;
    const double inv_size = 1.0 / static_cast<double>(g.size());

    // Per-axis kinetic phases for half and full steps.
    auto phases = [&](double t) {
        std::vector<std::vector<cplx>> out(rank, std::vector<cplx>(n));
        for (std::size_t a = 0; a < rank; ++a)
            for (std::size_t j = 0; j < n; ++j)
                out[a][j] = std::polar(1.0, -t * kinetic(a, g.wavenumber(j)) / hbar);
        return out;
    };
    const auto half = phases(0.5 * tau);
    const auto full = phases(tau);
    auto apply_kinetic = [&](const std::vector<std::vector<cplx>>& ph) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto idx = g.unravel(i);
            cplx f = ph[0][idx[0]];
            for (std::size_t a = 1; a < rank; ++a) f *= ph[a][idx[a]];
            data[i] *= f;
        }
    };
    std::vector<cplx> vphase(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        vphase[i] = std::polar(inv_size, -tau * potential_[i] / hbar);

    fft::transform(data, n, rank, fft::Direction::forward);
    apply_kinetic(half);
    for (std::size_t s = 0; s < steps; ++s) {
        fft::transform(data, n, rank, fft::Direction::backward);
        for (std::size_t i = 0; i < data.size(); ++i) data[i] *= vphase[i];
        fft::transform(data, n, rank, fft::Direction::forward);
        apply_kinetic(s + 1 == steps ? half : full);
    }
    fft::transform(data, n, rank, fft::Direction::backward);
    for (auto& x : data) x *= inv_size;
}

void Propagator::strang_axis(std::vector<cplx>& data, std::size_t axis, double tau,
                             std::size_t steps) const {
    const auto& g = grid_;
    const std::size_t n = g.cells();
    const std::size_t rank = g.n_particles();
    const std::size_t stride = g.stride(axis);
    const double hbar = spec_.hbar;
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<cplx> half(n), full(n), vphase(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double e = kinetic(axis, g.wavenumber(j));
        half[j] = std::polar(1.0, -0.5 * tau * e / hbar);
        full[j] = std::polar(1.0, -tau * e / hbar);
        vphase[j] = std::polar(inv_n, -tau * axis_potential_[axis][j] / hbar);
    }
    auto apply = [&](const std::vector<cplx>& ph) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] *= ph[(i / stride) % n];
    };
    fft::transform_axis(data, n, rank, axis, fft::Direction::forward);
    apply(half);
    for (std::size_t s = 0; s < steps; ++s) {
        fft::transform_axis(data, n, rank, axis, fft::Direction::backward);
        apply(vphase);
        fft::transform_axis(data, n, rank, axis, fft::Direction::forward);
        apply(s + 1 == steps ? half : full);
    }
    fft::transform_axis(data, n, rank, axis, fft::Direction::backward);
    for (auto& x : data) x *= inv_n;
}

ComplexField Propagator::evolve(const ComplexField& psi, double duration) const {
    if (!(psi.grid() == grid_)) throw std::invalid_argument("evolve: grid mismatch");
    if (duration == 0.0) return psi;
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    const std::size_t steps = substeps(duration);
    strang_full(data, duration / static_cast<double>(steps), steps);
    return ComplexField(grid_, std::move(data));
}

ComplexField Propagator::evolve_axes(const ComplexField& psi,
                                     std::span<const double> durations) const {
    if (!(psi.grid() == grid_)) throw std::invalid_argument("evolve_axes: grid mismatch");
    if (durations.size() != grid_.n_particles())
        throw std::invalid_argument("multi-time evolution needs one time per particle");
    if (!separable())
        throw std::invalid_argument(
            "multi-time evolution requires a noninteracting Hamiltonian (V = sum_i V_i(q_i))");
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    for (std::size_t a = 0; a < durations.size(); ++a) {
        if (durations[a] == 0.0) continue;
        const std::size_t steps = substeps(durations[a]);
        strang_axis(data, a, durations[a] / static_cast<double>(steps), steps);
    }
    return ComplexField(grid_, std::move(data));
}

double Propagator::expected_energy(const ComplexField& psi) const {
    if (!(psi.grid() == grid_)) throw std::invalid_argument("expected_energy: grid mismatch");
    const auto& g = grid_;
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    double pot = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double w = std::norm(data[i]);
        pot += w * potential_[i];
        mass += w;
    }
    if (!(mass > 0.0)) throw std::invalid_argument("expected_energy of a zero field");
    fft::transform(data, g.cells(), g.n_particles(), fft::Direction::forward);
    std::vector<std::vector<double>> kin(g.n_particles(), std::vector<double>(g.cells()));
    for (std::size_t a = 0; a < g.n_particles(); ++a)
        for (std::size_t j = 0; j < g.cells(); ++j) kin[a][j] = kinetic(a, g.wavenumber(j));
    double kinetic_sum = 0.0, spectral_mass = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto idx = g.unravel(i);
        double e = 0.0;
        for (std::size_t a = 0; a < g.n_particles(); ++a) e += kin[a][idx[a]];
        const double w = std::norm(data[i]);
        kinetic_sum += w * e;
        spectral_mass += w;
    }
    return kinetic_sum / spectral_mass + pot / mass;
}

ComplexField evolve(const ComplexField& psi, const HamiltonianSpec& h, double dt) {
    return Propagator(psi.grid(), h).evolve(psi, dt);
}

ComplexField multi_time_evolve(const ComplexField& psi0, const HamiltonianSpec& h,
                               std::span<const double> times) {
    return Propagator(psi0.grid(), h).evolve_axes(psi0, times);
}

double expected_energy(const ComplexField& psi, const HamiltonianSpec& h) {
    return Propagator(psi.grid(), h).expected_energy(psi);
}

}  // namespace qwo
