#include "qwo/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qwo/error.hpp"
#include "qwo/fft.hpp"

namespace qwo {
namespace {

// Contracts a row-major rank-N array against one vector per axis.
cplx contract(std::span<const cplx> data, std::size_t n, std::size_t rank,
              const std::array<const std::vector<cplx>*, kMaxParticles>& vecs) {
    std::vector<cplx> cur(data.begin(), data.end());
    std::size_t block = cur.size();
    for (std::size_t a = 0; a < rank; ++a) {
        block /= n;
        const auto& v = *vecs[a];
        std::vector<cplx> next(block, cplx{});
        for (std::size_t j = 0; j < n; ++j) {
            const cplx w = v[j];
            const cplx* src = cur.data() + j * block;
            for (std::size_t r = 0; r < block; ++r) next[r] += w * src[r];
        }
        cur.swap(next);
    }
    return cur[0];
}

}  // namespace

PsiSnapshot::PsiSnapshot(const ComplexField& psi, Interpolation mode)
    : grid_(psi.grid()), mode_(mode) {
    const double nrm = norm(psi);
    mean_density_ = nrm * nrm / std::pow(grid_.length(), static_cast<double>(grid_.n_particles()));
    if (mode_ == Interpolation::multilinear) {
        psi_.assign(psi.values().begin(), psi.values().end());
        for (std::size_t a = 0; a < grid_.n_particles(); ++a)
            grad_.push_back(std::move(spectral_derivative(psi, a)).release());
    } else {
        spectrum_.assign(psi.values().begin(), psi.values().end());
        fft::transform(spectrum_, grid_.cells(), grid_.n_particles(), fft::Direction::forward);
        const double inv = 1.0 / static_cast<double>(grid_.size());
        for (auto& c : spectrum_) c *= inv;
    }
}

LocalAmplitude PsiSnapshot::evaluate(const Config& q) const {
    return mode_ == Interpolation::multilinear ? multilinear(q) : spectral(q);
}

LocalAmplitude PsiSnapshot::multilinear(const Config& q) const {
    const std::size_t rank = grid_.n_particles();
    const std::size_t n = grid_.cells();
    std::array<std::size_t, kMaxParticles> lo{}, hi{};
    std::array<double, kMaxParticles> frac{};
    for (std::size_t a = 0; a < rank; ++a) {
        const double s = (q[a] - grid_.origin()) / grid_.dx();
        const double fl = std::floor(s);
        auto j = static_cast<long>(fl) % static_cast<long>(n);
        if (j < 0) j += static_cast<long>(n);
        lo[a] = static_cast<std::size_t>(j);
        hi[a] = (lo[a] + 1) % n;
        frac[a] = s - fl;
    }
    LocalAmplitude out;
    for (std::size_t corner = 0; corner < (std::size_t{1} << rank); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        for (std::size_t a = 0; a < rank; ++a) {
            const bool up = (corner >> a) & 1U;
            w *= up ? frac[a] : 1.0 - frac[a];
            flat = flat * n + (up ? hi[a] : lo[a]);
        }
        if (w == 0.0) continue;
        out.psi += w * psi_[flat];
        for (std::size_t a = 0; a < rank; ++a) out.grad[a] += w * grad_[a][flat];
    }
    return out;
}

LocalAmplitude PsiSnapshot::spectral(const Config& q) const {
    const std::size_t rank = grid_.n_particles();
    const std::size_t n = grid_.cells();
    const double nyquist = std::numbers::pi / grid_.dx();
    std::array<std::vector<cplx>, kMaxParticles> val, der;
    for (std::size_t a = 0; a < rank; ++a) {
        const double y = q[a] - grid_.origin();
        val[a].resize(n);
        der[a].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == n / 2) {
                val[a][j] = std::cos(nyquist * y);
                der[a][j] = -nyquist * std::sin(nyquist * y);
            } else {
                const double k = grid_.wavenumber(j);
                val[a][j] = std::polar(1.0, k * y);
                der[a][j] = cplx(0.0, k) * val[a][j];
            }
        }
    }
    std::array<const std::vector<cplx>*, kMaxParticles> vecs{};
    for (std::size_t a = 0; a < rank; ++a) vecs[a] = &val[a];
    LocalAmplitude out;
    out.psi = contract(spectrum_, n, rank, vecs);
    for (std::size_t b = 0; b < rank; ++b) {
        vecs[b] = &der[b];
        out.grad[b] = contract(spectrum_, n, rank, vecs);
        vecs[b] = &val[b];
    }
    return out;
}

Config velocity_from(const LocalAmplitude& a, double mean_density, const HamiltonianSpec& h,
                     std::size_t n_particles) {
    const double rho = std::norm(a.psi);
    if (!(rho >= kNodeFloor * mean_density))
        throw NumericalFailure("Bohmian velocity: configuration at a node of psi (|psi|^2 = " +
                               std::to_string(rho) + ")");
    Config v{};
    for (std::size_t i = 0; i < n_particles; ++i) {
        const double im = (std::conj(a.psi) * a.grad[i]).imag() / rho;
        v[i] = (h.hbar * im - h.charge(i) * h.vector_potential_on(i)) / h.masses[i];
    }
    return v;
}

Config bohm_velocity(const ComplexField& psi, const Config& q, const HamiltonianSpec& h,
                     Interpolation mode) {
    const PsiSnapshot snap(psi, mode);
    return velocity_from(snap.evaluate(q), snap.mean_density(), h, psi.grid().n_particles());
}

void PsiPath::push(double t, const ComplexField& psi, Interpolation mode) {
    push(t, PsiSnapshot(psi, mode));
}

void PsiPath::push(double t, PsiSnapshot snapshot) {
    if (!times_.empty() && !(t > times_.back()))
        throw std::invalid_argument("PsiPath: times must increase");
    if (!snaps_.empty() && !(snapshot.grid() == snaps_.front().grid()))
        throw std::invalid_argument("PsiPath: grid mismatch");
    times_.push_back(t);
    snaps_.push_back(std::move(snapshot));
}

PsiPath PsiPath::unitary(const ComplexField& psi0, const Propagator& prop, double t0,
                         double t_max, double spacing, Interpolation mode) {
    if (!(t_max >= t0)) throw std::invalid_argument("PsiPath: t_max precedes t0");
    if (!(spacing > 0.0)) throw std::invalid_argument("PsiPath: spacing must be positive");
    PsiPath path;
    ComplexField psi = psi0;
    path.push(t0, psi, mode);
    const auto steps = static_cast<std::size_t>(std::ceil((t_max - t0) / spacing - 1e-9));
    double t = t0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double next = k == steps ? t_max : t0 + static_cast<double>(k) * spacing;
        psi = prop.evolve(psi, next - t);
        t = next;
        path.push(t, psi, mode);
    }
    return path;
}

Config PsiPath::velocity(double t, const Config& q, const HamiltonianSpec& h) const {
    if (times_.empty()) throw std::logic_error("PsiPath is empty");
    const std::size_t rank = grid().n_particles();
    const double span = times_.back() - times_.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(span));
    if (t < times_.front() - slack || t > times_.back() + slack)
        throw std::out_of_range("PsiPath: time outside the recorded path");
    if (times_.size() == 1) return velocity_from(snaps_[0].evaluate(q), snaps_[0].mean_density(), h, rank);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    k = std::min(k, times_.size() - 2);
    const double w = std::clamp((t - times_[k]) / (times_[k + 1] - times_[k]), 0.0, 1.0);
    if (w == 0.0) return velocity_from(snaps_[k].evaluate(q), snaps_[k].mean_density(), h, rank);
    if (w == 1.0)
        return velocity_from(snaps_[k + 1].evaluate(q), snaps_[k + 1].mean_density(), h, rank);
    const auto a = snaps_[k].evaluate(q);
    const auto b = snaps_[k + 1].evaluate(q);
    LocalAmplitude m;
    m.psi = (1.0 - w) * a.psi + w * b.psi;
    for (std::size_t i = 0; i < rank; ++i) m.grad[i] = (1.0 - w) * a.grad[i] + w * b.grad[i];
    const double mean = (1.0 - w) * snaps_[k].mean_density() + w * snaps_[k + 1].mean_density();
    return velocity_from(m, mean, h, rank);
}

Config Trajectory::unwrapped(std::size_t k, double length) const {
    Config q = configs[k];
    for (std::size_t a = 0; a < n_particles; ++a)
        q[a] += static_cast<double>(windings[k][a]) * length;
    return q;
}

Trajectory integrate_trajectory(const VelocityField& v, const GridSpec& grid, const Config& q0,
                                double t0, double t_max, double dt) {
    if (!(t_max >= t0)) throw std::invalid_argument("integrate_trajectory: t_max precedes t0");
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_trajectory: dt must be positive");
    const std::size_t rank = grid.n_particles();
    Trajectory tr;
    tr.n_particles = rank;

    auto record = [&](double t, const Config& u) {
        Config w{};
        std::array<long, kMaxParticles> wind{};
        for (std::size_t a = 0; a < rank; ++a) {
            w[a] = grid.wrap(u[a]);
            wind[a] = std::lround((u[a] - w[a]) / grid.length());
        }
        tr.times.push_back(t);
        tr.configs.push_back(w);
        tr.windings.push_back(wind);
    };

    Config u{};
    for (std::size_t a = 0; a < rank; ++a) u[a] = q0[a];
    record(t0, u);
    const auto steps = static_cast<std::size_t>(std::ceil((t_max - t0) / dt - 1e-9));
    if (steps == 0) return tr;
    const double h = (t_max - t0) / static_cast<double>(steps);
    auto axpy = [rank](const Config& x, double s, const Config& k) {
        Config r = x;
        for (std::size_t a = 0; a < rank; ++a) r[a] += s * k[a];
        return r;
    };
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + static_cast<double>(s) * h;
        const Config k1 = v(t, u);
        const Config k2 = v(t + 0.5 * h, axpy(u, 0.5 * h, k1));
        const Config k3 = v(t + 0.5 * h, axpy(u, 0.5 * h, k2));
        const Config k4 = v(t + h, axpy(u, h, k3));
        for (std::size_t a = 0; a < rank; ++a)
            u[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        for (std::size_t a = 0; a < rank; ++a)
            if (!std::isfinite(u[a])) throw NumericalFailure("trajectory became non-finite");
        record(s + 1 == steps ? t_max : t0 + static_cast<double>(s + 1) * h, u);
    }
    return tr;
}

Trajectory integrate_trajectory(const PsiPath& path, const HamiltonianSpec& h, const Config& q0,
                                double t0, double t_max, double dt) {
    return integrate_trajectory(
        [&](double t, const Config& q) { return path.velocity(t, q, h); }, path.grid(), q0, t0,
        t_max, dt);
}

EquilibriumSampler::EquilibriumSampler(const ComplexField& psi) : grid_(psi.grid()) {
    density_.resize(psi.size());
    double total = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) total += density_[i] = std::norm(psi[i]);
    if (!(total > 0.0)) throw std::invalid_argument("sample_equilibrium: zero wave function");
}

Config EquilibriumSampler::draw(Rng& rng) const {
    const std::size_t n = grid_.cells();
    const std::size_t rank = grid_.n_particles();
    Config q{};
    std::size_t base = 0;
    std::size_t block = grid_.size();
    for (std::size_t a = 0; a < rank; ++a) {
        block /= n;
        std::vector<double> w(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double* src = density_.data() + base + j * block;
            double s = 0.0;
            for (std::size_t r = 0; r < block; ++r) s += src[r];
            w[j] = s;
        }
        const std::size_t cell = inverse_cdf_cell(w, rng.uniform());
        q[a] = grid_.wrap(grid_.position(cell) + (rng.uniform() - 0.5) * grid_.dx());
        base += cell * block;
    }
    return q;
}

Config sample_equilibrium(const ComplexField& psi, Rng& rng) {
    return EquilibriumSampler(psi).draw(rng);
}

ComplexField bmc_transform(const ComplexField& psi, const Config& Q, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("bmc_transform: sigma must be positive");
    const auto& g = psi.grid();
    const std::size_t rank = g.n_particles();
    std::vector<std::vector<double>> factor(rank, std::vector<double>(g.cells()));
    for (std::size_t a = 0; a < rank; ++a)
        for (std::size_t j = 0; j < g.cells(); ++j) {
            const double d = g.periodic_delta(g.position(j), Q[a]);
            factor[a][j] = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    std::vector<cplx> out(psi.values().begin(), psi.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto idx = g.unravel(i);
        double f = 1.0;
        for (std::size_t a = 0; a < rank; ++a) f *= factor[a][idx[a]];
        out[i] *= f;
    }
    return ComplexField(g, std::move(out));
}

Config bmc_velocity(const ComplexField& psiC, const Config& Q, const HamiltonianSpec& h,
                    Interpolation mode) {
    return bohm_velocity(psiC, Q, h, mode);
}

namespace {

ComplexField second_derivative(const ComplexField& psi, std::size_t axis) {
    const auto& g = psi.grid();
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    const std::size_t n = g.cells();
    fft::transform_axis(data, n, g.n_particles(), axis, fft::Direction::forward);
    const std::size_t s = g.stride(axis);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double k = g.wavenumber((i / s) % n);
        data[i] *= -k * k * inv_n;
    }
    fft::transform_axis(data, n, g.n_particles(), axis, fft::Direction::backward);
    return ComplexField(g, std::move(data));
}

}  // namespace

double bmc_pde_residual(const BmcTriple& c, double dt, double sigma, const Propagator& prop) {
    const auto& g = c.mid.grid();
    if (!(c.prev.grid() == g) || !(c.next.grid() == g))
        throw std::invalid_argument("bmc_pde_residual: grid mismatch");
    if (!(dt > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("bmc_pde_residual: bad step");
    const auto& h = prop.spec();
    for (std::size_t a = 0; a < g.n_particles(); ++a)
        if (h.vector_potential_on(a) != 0.0)
            throw std::invalid_argument("bmc_pde_residual: vector potential not supported");
    const std::size_t rank = g.n_particles();
    const double s2 = sigma * sigma;

    // Im(d_i psi^C / psi^C) at the actual configuration.
    const PsiSnapshot snap(c.mid, Interpolation::spectral);
    const auto local = snap.evaluate(c.Q);
    const double rho = std::norm(local.psi);
    if (!(rho >= kNodeFloor * snap.mean_density()))
        throw NumericalFailure("bmc_pde_residual: configuration at a node");
    std::array<double, kMaxParticles> phase_grad{};
    for (std::size_t a = 0; a < rank; ++a)
        phase_grad[a] = (std::conj(local.psi) * local.grad[a]).imag() / rho;

    std::vector<std::vector<cplx>> d1, d2;
    for (std::size_t a = 0; a < rank; ++a) {
        d1.push_back(std::move(spectral_derivative(c.mid, a)).release());
        d2.push_back(std::move(second_derivative(c.mid, a)).release());
    }
    const auto pot = prop.potential();
    const auto u = c.mid.values();
    const auto up = c.prev.values();
    const auto un = c.next.values();
    const cplx ih(0.0, h.hbar);
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto idx = g.unravel(i);
        cplx rhs = pot[i] * u[i];
        double vt = 0.0;
        for (std::size_t a = 0; a < rank; ++a) {
            const double m = h.masses[a];
            const double ax = g.periodic_delta(g.position(idx[a]), c.Q[a]) / s2;
            const cplx cov = d2[a][i] + 2.0 * ax * d1[a][i] + (1.0 / s2 + ax * ax) * u[i];
            rhs -= h.hbar * h.hbar / (2.0 * m) * cov;
            vt += h.hbar * h.hbar / m * ax * phase_grad[a];
        }
        rhs += cplx(0.0, vt) * u[i];
        const cplx r = ih * (un[i] - up[i]) / (2.0 * dt) - rhs;
        sum += std::norm(r);
    }
    return std::sqrt(sum * g.cell_volume());
}

}  // namespace qwo
