#include "qwo/checks.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "qwo/parallel.hpp"
#include "qwo/sampling.hpp"

namespace qwo {

std::vector<TestReport> check_bm_equivariance(const ComplexField& psi0, const Propagator& prop,
                                              double t, std::size_t n, std::uint64_t seed,
                                              double dt, Interpolation mode) {
    const auto& g = psi0.grid();
    const std::size_t rank = g.n_particles();
    const ComplexField unit = psi0.normalized();
    const EquilibriumSampler sampler(unit);
    const auto path = PsiPath::unitary(unit, prop, 0.0, t, dt, mode);
    std::vector<Config> finals(n);
    parallel_for(n, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        const Config q0 = sampler.draw(rng);
        if (t == 0.0) {
            finals[i] = q0;
            return;
        }
        const auto tr = integrate_trajectory(path, prop.spec(), q0, 0.0, t, dt);
        finals[i] = tr.configs.back();
    });
    const ComplexField psi_t = prop.evolve(unit, t);
    std::vector<TestReport> out;
    for (std::size_t a = 0; a < rank; ++a) {
        const auto m = marginal(psi_t, a);
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = finals[i][a];
        auto r = ks_one_sample(xs, [&](double x) { return density_cdf(m, x); },
                               "bm_equivariance_axis" + std::to_string(a + 1));
        r.seed = seed;
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

struct PostShift {
    std::optional<double> time;
    double x = 0.0;
    std::optional<double> displacement;
    double mass = 0.0;
};

double region_mass(const ComplexField& psi, const std::vector<double>& masses, const Region& r) {
    const auto m = matter_density(psi, masses);
    double s = 0.0;
    for (std::size_t j = 0; j < m.cells; ++j)
        if (m.position(j) >= r.lo && m.position(j) < r.hi) s += m.values[j] * m.dx();
    return s;
}

// Region mass fraction rounded to 1e-9; below that, values are roundoff and
// their ordering would dominate a rank test.
double probe_fraction(const ComplexField& psi, const std::vector<double>& masses, const Region& r) {
    double total = 0.0;
    for (double m : masses) total += m;
    return std::round(region_mass(psi, masses, r) / total * 1e9) * 1e-9;
}

constexpr std::uint64_t kSaltHarvest = 0x6861727665737431ULL;

}  // namespace

TestReport check_generalized_equivariance(const ComplexField& psi0, const Propagator& prop,
                                          const TheoryParams& params,
                                          const GeneralizedEquivarianceOptions& o) {
    const auto& g = psi0.grid();
    const double total = params.total_rate(g.n_particles());
    const double horizon = 20.0 / total;
    const auto& masses = prop.spec().masses;
    const ComplexField unit = psi0.normalized();
    const ComplexField linear_at_shift = prop.evolve(unit, o.t_shift);
    GrwOptions quiet;
    quiet.checkpoints = 0;
    quiet.keep_checkpoints = false;

    auto first_after = [&](const FlashHistory& h, double after, double offset,
                           const FlashHistory& past) {
        PostShift p;
        for (const auto& f : h.flashes())
            if (f.t > after) {
                p.time = f.t - offset;
                p.x = f.x;
                if (!past.empty()) p.displacement = g.periodic_delta(f.x, past.flashes().back().x);
                break;
            }
        return p;
    };

    std::vector<PostShift> a(o.n), b(o.n);
    parallel_for(o.n, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed, i);
        if (o.theory == CollapseTheory::grwf) {
            const auto run = run_grw_collapse(unit, 0.0, o.t_shift + horizon, prop, params, rng, quiet);
            a[i] = first_after(run.history, o.t_shift, o.t_shift, run.history.until(o.t_shift));
        } else {
            const auto run = run_grw_collapse(unit, 0.0, o.t_shift + o.probe_delay, prop, params, rng, quiet);
            a[i].mass = probe_fraction(run.final_state, masses, o.probe_region);
        }
    });
    parallel_for(o.n, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed ^ kSaltHarvest, i);
        const auto harvest = run_grw_collapse(unit, 0.0, o.t_shift, prop, params, rng, quiet);
        const ComplexField& start = o.restart_from_linear ? linear_at_shift : harvest.final_state;
        if (o.theory == CollapseTheory::grwf) {
            GrwOptions one = quiet;
            one.max_flashes = 1;
            const auto fresh = run_grw_collapse(start, 0.0, horizon, prop, params, rng, one);
            b[i] = first_after(fresh.history, -1.0, 0.0, harvest.history);
        } else {
            const auto fresh = run_grw_collapse(start, 0.0, o.probe_delay, prop, params, rng, quiet);
            b[i].mass = probe_fraction(fresh.final_state, masses, o.probe_region);
        }
    });

    std::vector<TestReport> parts;
    if (o.theory == CollapseTheory::grwf) {
        std::vector<double> ta, tb, xa, xb, da, db;
        for (const auto& p : a) {
            if (p.time) {
                ta.push_back(*p.time);
                xa.push_back(p.x);
            }
            if (p.displacement) da.push_back(*p.displacement);
        }
        for (const auto& p : b) {
            if (p.time) {
                tb.push_back(*p.time);
                xb.push_back(p.x);
            }
            if (p.displacement) db.push_back(*p.displacement);
        }
        parts.push_back(ks_two_sample(ta, tb, "first_post_shift_time"));
        parts.push_back(ks_two_sample(xa, xb, "first_post_shift_location"));
        if (o.t_shift > 0.0) parts.push_back(ks_two_sample(da, db, "displacement_from_last_flash"));
    } else {
        std::vector<double> ma, mb;
        for (const auto& p : a) ma.push_back(p.mass);
        for (const auto& p : b) mb.push_back(p.mass);
        parts.push_back(ks_two_sample(ma, mb, "probe_region_mass"));
    }
    auto r = combine_bonferroni(parts, o.theory == CollapseTheory::grwf ? "generalized_equivariance_grwf"
                                                                        : "generalized_equivariance_grwm");
    r.seed = o.seed;
    for (const auto& p : parts)
        r.note += "; " + p.name + " p=" + (p.p_value ? std::to_string(*p.p_value) : "n/a");
    return r;
}

double density_matrix_distance(const EnsembleSpec& a, const EnsembleSpec& b, std::uint64_t seed) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ensemble is empty");
    const GridSpec& g = a.front().psi.grid();
    auto check = [&](const EnsembleSpec& e) {
        double w = 0.0;
        for (const auto& m : e) {
            if (!(m.psi.grid() == g)) throw std::invalid_argument("ensemble grid mismatch");
            if (!(m.weight > 0.0 && m.weight <= 1.0)) throw std::invalid_argument("ensemble weight out of (0,1]");
            if (std::abs(norm(m.psi) - 1.0) > 1e-10) throw std::invalid_argument("ensemble member not normalized");
            w += m.weight;
        }
        if (std::abs(w - 1.0) > 1e-12) throw std::invalid_argument("ensemble weights do not sum to 1");
    };
    check(a);
    check(b);
    const std::size_t n = g.size();
    const double vol = g.cell_volume();
    if (n <= 1024) {
        std::vector<cplx> rho(n * n, cplx{});
        auto add = [&](const EnsembleSpec& e, double s) {
            for (const auto& m : e)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        rho[i * n + j] += s * m.weight * m.psi[i] * std::conj(m.psi[j]) * vol;
        };
        add(a, 1.0);
        add(b, -1.0);
        double d = 0.0;
        for (const auto& v : rho) d = std::max(d, std::abs(v));
        return d;
    }
    Rng rng(seed);
    double d = 0.0;
    for (int probe = 0; probe < 16; ++probe) {
        std::vector<cplx> phi(n);
        for (auto& v : phi) v = {rng.normal(), rng.normal()};
        const ComplexField f = ComplexField(g, std::move(phi)).normalized();
        double qa = 0.0, qb = 0.0;
        for (const auto& m : a) qa += m.weight * std::norm(inner(f, m.psi));
        for (const auto& m : b) qb += m.weight * std::norm(inner(f, m.psi));
        d = std::max(d, std::abs(qa - qb));
    }
    return d;
}

TestReport density_matrix_discrimination(const EnsembleSpec& mu, const EnsembleSpec& mu_prime,
                                         const Propagator& prop, const TheoryParams& params,
                                         const DiscriminationOptions& o) {
    const double dist = density_matrix_distance(mu, mu_prime);
    if (dist > 1e-10) {
        TestReport r;
        r.name = "density_matrix_discrimination";
        r.statistic_name = "density_matrix_distance";
        r.statistic = dist;
        r.verdict = Verdict::inconclusive;
        r.note = "precondition violated: density matrices differ; no verdict";
        r.seed = o.seed;
        return r;
    }
    auto pick = [](const EnsembleSpec& e, double u) -> const ComplexField& {
        double acc = 0.0;
        for (const auto& m : e) {
            acc += m.weight;
            if (u < acc) return m.psi;
        }
        return e.back().psi;
    };
    const std::size_t n_labels = mu.front().psi.grid().n_particles();
    if (o.branch == DiscriminationBranch::grwf) {
        const double horizon = 40.0 / params.total_rate(n_labels);
        GrwOptions one;
        one.checkpoints = 0;
        one.keep_checkpoints = false;
        one.max_flashes = 1;
        std::vector<double> ta(o.n, -1.0), xa(o.n), tb(o.n, -1.0), xb(o.n);
        parallel_for(2 * o.n, [&](std::size_t k) {
            const bool second = k >= o.n;
            const std::size_t i = second ? k - o.n : k;
            Rng rng = Rng::stream(o.seed + (second ? 1 : 0), i);
            const auto& psi = pick(second ? mu_prime : mu, rng.uniform());
            const auto run = run_grw_collapse(psi, 0.0, horizon, prop, params, rng, one);
            if (run.history.empty()) return;
            (second ? tb : ta)[i] = run.history[0].t;
            (second ? xb : xa)[i] = run.history[0].x;
        });
        auto keep = [](const std::vector<double>& t, const std::vector<double>& v) {
            std::vector<double> out;
            for (std::size_t i = 0; i < t.size(); ++i)
                if (t[i] >= 0.0) out.push_back(v[i]);
            return out;
        };
        std::vector<TestReport> parts{
            ks_two_sample(keep(ta, ta), keep(tb, tb), "first_flash_time"),
            ks_two_sample(keep(ta, xa), keep(tb, xb), "first_flash_location"),
        };
        auto r = combine_bonferroni(parts, "density_matrix_discrimination_grwf");
        r.seed = o.seed;
        r.note += "; density matrix distance " + std::to_string(dist);
        return r;
    }
    // Single-time m-field: region mass of the drawn member.
    double total_mass = 0.0;
    for (double m : prop.spec().masses) total_mass += m;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < 2 * o.n; ++k) {
        const bool second = k >= o.n;
        Rng rng = Rng::stream(o.seed + (second ? 1 : 0), k % o.n);
        const auto& psi = pick(second ? mu_prime : mu, rng.uniform());
        const double frac = region_mass(psi, prop.spec().masses, o.region) / total_mass;
        const bool localized = std::abs(frac - 0.5) > 0.25;
        if (localized == second) ++correct;
    }
    // Either ensemble may be the localized one.
    correct = std::max(correct, 2 * o.n - correct);
    TestReport r;
    r.name = "density_matrix_discrimination_grwm_single_time";
    r.statistic_name = "classification_accuracy";
    r.statistic = static_cast<double>(correct) / static_cast<double>(2 * o.n);
    r.threshold = 1.0;
    r.sample_sizes = {o.n, o.n};
    r.seed = o.seed;
    if (o.n < kMinSamples) {
        r.verdict = Verdict::inconclusive;
        r.note = "under-powered";
    } else {
        r.verdict = r.statistic >= 1.0 ? Verdict::pass : Verdict::fail;
        r.note = "ensembles separated by the region mass at one time";
    }
    return r;
}

TestReport check_grwm_grwf_empirical_equivalence(const ComplexField& psi0, const Propagator& prop,
                                                 const TheoryParams& params,
                                                 const EquivalenceOptions& o) {
    std::vector<Readout> from_flashes(o.n_runs), from_mass(o.n_runs);
    GrwOptions quiet;
    quiet.checkpoints = 0;
    quiet.keep_checkpoints = false;
    parallel_for(o.n_runs, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed, i);
        const auto run = run_grw_collapse(psi0, 0.0, o.t_max, prop, params, rng, quiet);
        from_flashes[i] = pointer_readout(run.history, o.readout);
        MatterDensity m;
        m.append(run.t_end, matter_density(run.final_state, prop.spec().masses));
        from_mass[i] = pointer_readout(m, o.readout);
    });
    std::size_t agree = 0, contradictions = 0;
    for (std::size_t i = 0; i < o.n_runs; ++i) {
        if (from_flashes[i] == from_mass[i]) ++agree;
        else if (from_flashes[i] && from_mass[i]) ++contradictions;
    }
    TestReport r;
    r.name = "grwm_grwf_empirical_equivalence";
    r.statistic_name = "agreement_fraction";
    r.statistic = o.n_runs ? static_cast<double>(agree) / static_cast<double>(o.n_runs) : 0.0;
    r.threshold = 0.99;
    r.sample_sizes = {o.n_runs};
    r.seed = o.seed;
    r.note = std::to_string(contradictions) + " runs with contradicting (non-abstaining) readouts";
    if (o.n_runs < kMinSamples) r.verdict = Verdict::inconclusive;
    else r.verdict = r.statistic >= 0.99 && contradictions == 0 ? Verdict::pass : Verdict::fail;
    return r;
}

}  // namespace qwo
