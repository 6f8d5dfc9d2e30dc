#include "qwo/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qwo/error.hpp"

namespace qwo {

RealField1D MatterDensity::slice(std::size_t k) const {
    if (k >= times.size()) throw std::out_of_range("MatterDensity: slice out of range");
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(k * cells);
    return RealField1D(cells, length, origin, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(cells)));
}

void MatterDensity::append(double t, const RealField1D& m) {
    if (times.empty()) {
        cells = m.cells;
        length = m.length;
        origin = m.origin;
    } else if (m.cells != cells || !(t > times.back())) {
        throw std::invalid_argument("MatterDensity: slices must share a grid and increase in time");
    }
    times.push_back(t);
    values.insert(values.end(), m.values.begin(), m.values.end());
}

RealField1D matter_density(const ComplexField& psi, std::span<const double> masses) {
    const auto& g = psi.grid();
    if (masses.size() != g.n_particles())
        throw std::invalid_argument("matter_density: one mass per particle required");
    std::vector<double> m(g.cells(), 0.0);
    for (std::size_t i = 0; i < g.n_particles(); ++i) {
        const auto mi = marginal(psi, i);
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += masses[i] * mi.values[j];
    }
    return physical_axis(g, std::move(m));
}

GrwmRun run_grwm(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                 const TheoryParams& params, Rng& rng, const GrwOptions& options) {
    GrwOptions opts = options;
    opts.keep_checkpoints = true;
    const auto run = run_grw_collapse(psi0, t0, t_max, prop, params, rng, opts);
    GrwmRun out;
    for (const auto& c : run.checkpoints) out.density.append(c.t, matter_density(c.psi, prop.spec().masses));
    out.flashes = run.history;
    return out;
}

MatterDensity run_sm(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                     std::size_t checkpoints) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    MatterDensity m;
    const auto& masses = prop.spec().masses;
    ComplexField psi = psi0;
    m.append(t0, matter_density(psi, masses));
    if (t_max == t0 || checkpoints == 0) return m;
    double t = t0;
    for (std::size_t k = 1; k <= checkpoints; ++k) {
        const double next =
            t0 + (t_max - t0) * static_cast<double>(k) / static_cast<double>(checkpoints);
        psi = prop.evolve(psi, next - t);
        t = next;
        m.append(t, matter_density(psi, masses));
    }
    return m;
}

FlashHistory run_sf(const ComplexField& psi0, double t0, double t_max, const Propagator& prop,
                    const TheoryParams& params, Rng& rng, bool sigma_zero,
                    std::optional<std::size_t> max_flashes) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    const std::size_t n = psi0.grid().n_particles();
    params.validate(n);
    const double total = params.total_rate(n);
    const auto rates = params.rates(n);
    FlashHistory out;
    ComplexField psi = psi0;
    double t = t0;
    for (;;) {
        if (max_flashes && out.size() >= *max_flashes) break;
        const double T = t + rng.exponential(total);
        if (T > t_max) break;
        psi = prop.evolve(psi, T - t);
        t = T;
        if (sigma_zero) {
            const std::size_t axis = rng.discrete(rates);
            const double x = sample_density(normalized_marginal(psi, axis), rng);
            out.push({T, x, static_cast<int>(axis + 1)});
        } else {
            out.push(draw_flash(psi, T, params, rng));
        }
    }
    return out;
}

namespace {

// Weights of the band-limited interpolant at X on a periodic axis.
std::vector<double> trig_weights(const GridSpec& g, double X) {
    const std::size_t n = g.cells();
    const double nyq = std::numbers::pi / g.dx();
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double y = X - g.position(j);
        double s = std::cos(nyq * y);
        for (std::size_t m = 1; m < n / 2; ++m)
            s += 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) * y / g.length());
        w[j] = (s + 1.0) / static_cast<double>(n);
    }
    return w;
}

}  // namespace

RealField1D multi_time_conditional(const ComplexField& psi0, const Propagator& prop,
                                   std::size_t axis, std::span<const double> durations,
                                   const Config& others) {
    const auto& g = psi0.grid();
    const std::size_t rank = g.n_particles();
    if (axis >= rank) throw std::out_of_range("multi_time_conditional: axis out of range");
    const auto psi = prop.evolve_axes(psi0, durations);
    std::vector<std::vector<double>> w(rank);
    for (std::size_t k = 0; k < rank; ++k)
        if (k != axis) w[k] = trig_weights(g, others[k]);
    std::vector<cplx> line(g.cells(), cplx{});
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const auto idx = g.unravel(i);
        double f = 1.0;
        for (std::size_t k = 0; k < rank; ++k)
            if (k != axis) f *= w[k][idx[k]];
        line[idx[axis]] += f * psi[i];
    }
    std::vector<double> d(g.cells());
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) total += d[j] = std::norm(line[j]);
    if (!(total > 0.0))
        throw NumericalFailure("multi-time conditional density vanishes identically");
    for (auto& v : d) v /= total * g.dx();
    return physical_axis(g, std::move(d));
}

SfPrimeRun run_sf_prime(const ComplexField& psi0, double t0, double t_max,
                        const Propagator& prop, const TheoryParams& params, Rng& rng,
                        std::optional<std::size_t> max_flashes) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    if (!prop.separable())
        throw std::invalid_argument("Sf' requires a noninteracting Hamiltonian");
    const std::size_t n = psi0.grid().n_particles();
    params.validate(n);
    const double total = params.total_rate(n);
    const auto rates = params.rates(n);

    SfPrimeRun out;
    Config last_x{};
    std::vector<double> last_t(n, t0);
    for (std::size_t k = 0; k < n; ++k) {
        last_x[k] = sample_density(marginal(psi0, k), rng);
        out.seeds.push_back(last_x[k]);
    }
    double t = t0;
    std::vector<double> durations(n);
    for (;;) {
        if (max_flashes && out.history.size() >= *max_flashes) break;
        const double T = t + rng.exponential(total);
        if (T > t_max) break;
        t = T;
        const std::size_t axis = rng.discrete(rates);
        for (std::size_t k = 0; k < n; ++k) durations[k] = (k == axis ? T : last_t[k]) - t0;
        const auto density = multi_time_conditional(psi0, prop, axis, durations, last_x);
        const double x = sample_density(density, rng);
        out.history.push({T, x, static_cast<int>(axis + 1)});
        last_x[axis] = x;
        last_t[axis] = T;
    }
    return out;
}

GrwpRun run_grwp(const ComplexField& psi0, const Config& q0, double t0, double t_max,
                 const Propagator& prop, const TheoryParams& params, Rng& rng, double dt,
                 Interpolation mode) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    const auto& g = psi0.grid();
    const std::size_t n = g.n_particles();
    params.validate(n);
    const double total = params.total_rate(n);
    const auto rates = params.rates(n);

    GrwpRun out{Trajectory{}, FlashHistory{}, psi0};
    out.trajectory.n_particles = n;
    ComplexField psi = psi0;
    Config q = q0;
    double t = t0;
    bool first = true;
    auto segment = [&](double until) {
        if (until <= t) return;
        const auto path = PsiPath::unitary(psi, prop, t, until, dt, mode);
        const auto piece = integrate_trajectory(path, prop.spec(), q, t, until, dt);
        for (std::size_t k = first ? 0 : 1; k < piece.size(); ++k) {
            out.trajectory.times.push_back(piece.times[k]);
            out.trajectory.configs.push_back(piece.configs[k]);
            out.trajectory.windings.push_back(piece.windings[k]);
        }
        first = false;
        q = piece.unwrapped(piece.size() - 1, g.length());
        psi = prop.evolve(psi, until - t);
        t = until;
    };
    for (;;) {
        const double T = t + rng.exponential(total);
        if (T > t_max) {
            segment(t_max);
            break;
        }
        segment(T);
        const std::size_t axis = rng.discrete(rates);
        const double x = g.wrap(q[axis]);
        psi = apply_collapse(psi, axis, x, params.sigma);
        out.flashes.push({T, x, static_cast<int>(axis + 1)});
    }
    if (out.trajectory.times.empty()) {
        out.trajectory = integrate_trajectory([](double, const Config&) { return Config{}; }, g, q0,
                                              t0, t0, 1.0);
    }
    out.final_state = psi;
    return out;
}

std::vector<Config> run_bmw(const ComplexField& psi0, double t0,
                            std::span<const double> sample_times, const Propagator& prop,
                            Rng& rng) {
    std::vector<Config> out;
    ComplexField psi = psi0;
    double t = t0;
    for (double s : sample_times) {
        if (s < t) throw std::invalid_argument("run_bmw: sample times must be nondecreasing and >= t0");
        psi = prop.evolve(psi, s - t);
        t = s;
        out.push_back(EquilibriumSampler(psi).draw(rng));
    }
    return out;
}

void ReadoutSpec::validate() const {
    if (regions.empty()) throw std::invalid_argument("readout: no regions");
    for (const auto& r : regions)
        if (!(r.hi > r.lo)) throw std::invalid_argument("readout: region '" + r.name + "' is empty");
    for (std::size_t a = 0; a < regions.size(); ++a)
        for (std::size_t b = a + 1; b < regions.size(); ++b)
            if (regions[a].lo < regions[b].hi && regions[b].lo < regions[a].hi)
                throw std::invalid_argument("readout: regions overlap");
    if (!(window_end >= window_begin)) throw std::invalid_argument("readout: bad window");
    if (!(dominance > 0.5 && dominance <= 1.0))
        throw std::invalid_argument("readout: dominance must be in (0.5, 1]");
}

namespace {

Readout decide(const ReadoutSpec& spec, const std::vector<double>& share, double total) {
    if (!(total > 0.0)) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t r = 1; r < share.size(); ++r)
        if (share[r] > share[best]) best = r;
    for (std::size_t r = 0; r < share.size(); ++r)
        if (r != best && share[r] == share[best]) return std::nullopt;
    if (share[best] < spec.dominance * total) return std::nullopt;
    return spec.regions[best].name;
}

int region_of(const ReadoutSpec& spec, double x) {
    for (std::size_t r = 0; r < spec.regions.size(); ++r)
        if (x >= spec.regions[r].lo && x < spec.regions[r].hi) return static_cast<int>(r);
    return -1;
}

}  // namespace

Readout pointer_readout(const FlashHistory& flashes, const ReadoutSpec& spec) {
    spec.validate();
    std::vector<double> count(spec.regions.size(), 0.0);
    double total = 0.0;
    for (const auto& f : flashes.flashes()) {
        if (f.t < spec.window_begin || f.t > spec.window_end) continue;
        total += 1.0;
        if (int r = region_of(spec, f.x); r >= 0) count[static_cast<std::size_t>(r)] += 1.0;
    }
    return decide(spec, count, total);
}

Readout pointer_readout(const MatterDensity& m, const ReadoutSpec& spec) {
    spec.validate();
    std::optional<std::size_t> k;
    for (std::size_t i = 0; i < m.times.size(); ++i)
        if (m.times[i] <= spec.window_end) k = i;
    if (!k) return std::nullopt;
    const auto s = m.slice(*k);
    std::vector<double> mass(spec.regions.size(), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < s.cells; ++j) {
        const double w = s.values[j] * s.dx();
        total += w;
        if (int r = region_of(spec, s.position(j)); r >= 0) mass[static_cast<std::size_t>(r)] += w;
    }
    return decide(spec, mass, total);
}

Readout pointer_readout(const Trajectory& tr, const ReadoutSpec& spec,
                        std::span<const double> masses) {
    spec.validate();
    if (masses.size() != tr.n_particles)
        throw std::invalid_argument("readout: one mass per particle required");
    std::optional<std::size_t> k;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        if (tr.times[i] <= spec.window_end) k = i;
    if (!k) return std::nullopt;
    std::vector<double> mass(spec.regions.size(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < tr.n_particles; ++a) {
        total += masses[a];
        if (int r = region_of(spec, tr.configs[*k][a]); r >= 0)
            mass[static_cast<std::size_t>(r)] += masses[a];
    }
    return decide(spec, mass, total);
}

}  // namespace qwo
