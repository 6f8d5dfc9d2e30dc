#include "qwo/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "qwo/checks.hpp"
#include "qwo/config.hpp"
#include "qwo/error.hpp"
#include "qwo/io.hpp"
#include "qwo/parallel.hpp"
#include "qwo/symmetry.hpp"

namespace qwo {

namespace {

using json = nlohmann::json;

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

TestReport measured(std::string name, std::string statistic_name, double value, double threshold,
                    bool pass, std::string note = {}) {
    TestReport r;
    r.name = std::move(name);
    r.statistic_name = std::move(statistic_name);
    r.statistic = value;
    r.threshold = threshold;
    r.verdict = pass ? Verdict::pass : Verdict::fail;
    r.note = std::move(note);
    return r;
}

TestReport renamed(TestReport r, std::string name) {
    r.name = std::move(name);
    return r;
}

struct Setup {
    RunConfig cfg;
    GridSpec grid;
    HamiltonianSpec h;
    ComplexField psi0;
    Propagator prop;

    explicit Setup(RunConfig c)
        : cfg(std::move(c)),
          grid(cfg.grid()),
          h(resolved_hamiltonian(cfg)),
          psi0(make_state(grid, cfg.initial)),
          prop(grid, h) {}
};

GrwOptions first_flashes(std::size_t k) {
    GrwOptions o;
    o.checkpoints = 0;
    o.keep_checkpoints = false;
    o.max_flashes = k;
    return o;
}

double fidelity(const ComplexField& a, const ComplexField& b) {
    return std::norm(inner(a, b)) / (std::pow(norm(a), 2) * std::pow(norm(b), 2));
}

VelocityField bm_field(const Propagator& prop, const ComplexField& psi0) {
    return [&prop, &psi0](double t, const Config& q) {
        return bohm_velocity(prop.evolve(psi0, t), q, prop.spec(), Interpolation::spectral);
    };
}

VelocityField bmc_field(const Propagator& prop, const ComplexField& psi0, double sigma) {
    return [&prop, &psi0, sigma](double t, const Config& q) {
        return bmc_velocity(bmc_transform(prop.evolve(psi0, t), q, sigma), q, prop.spec(),
                            Interpolation::spectral);
    };
}

std::size_t pick(bool quick, std::size_t full, std::size_t reduced) { return quick ? reduced : full; }

// ---------------------------------------------------------------------------

std::vector<TestReport> unitarity(const SuiteOptions&) {
    double drift = 0.0;
    for (const char* name : {"harmonic", "double_well", "entangled_pair"}) {
        Setup s(preset(name));
        ComplexField psi = s.psi0;
        const double n0 = norm(psi);
        for (int k = 0; k < 1000; ++k) psi = s.prop.evolve(psi, 0.01);
        drift = std::max(drift, std::abs(norm(psi) - n0));
    }
    const double s0 = 1.0;
    GridSpec g(1, 256, 40.0, -20.0);
    InitialState init;
    init.width = s0;
    const ComplexField psi0 = make_state(g, init);
    const Propagator prop(g, with_masses({1.0}));
    double width_err = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
        const auto m = marginal(prop.evolve(psi0, t), 0);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < m.cells; ++j) {
            m1 += m.values[j] * m.position(j) * m.dx();
            m2 += m.values[j] * m.position(j) * m.position(j) * m.dx();
        }
        const double expected = s0 * std::sqrt(1.0 + std::pow(t / (2 * s0 * s0), 2));
        width_err = std::max(width_err, std::abs(std::sqrt(m2 - m1 * m1) / expected - 1.0));
    }
    return {measured("norm_drift", "max_abs_norm_change", drift, 1e-10, drift <= 1e-10, "1000 steps of 0.01"),
            measured("free_spreading", "max_rel_width_error", width_err, 1e-3, width_err <= 1e-3)};
}

std::vector<TestReport> equivariance(const SuiteOptions& o) {
    struct Case {
        const char* name;
        double t;
        double momentum;
    };
    std::vector<TestReport> out;
    for (const Case c : {Case{"free_packet", 1.5, 1.0}, Case{"harmonic", 1.5, 0.0}, Case{"double_well", 1.0, 0.0}}) {
        RunConfig cfg = preset(c.name);
        cfg.initial.momentum = c.momentum;
        Setup s(cfg);
        for (auto& r : check_bm_equivariance(s.psi0, s.prop, c.t, pick(o.quick, 2000, 500), o.seed))
            out.push_back(renamed(r, std::string("bm_equivariance_") + c.name));
    }
    return out;
}

std::vector<TestReport> grw_sampler(const SuiteOptions& o) {
    GridSpec g(1, 16, 16.0, -8.0);
    InitialState init;
    init.width = 2.0;
    init.momentum = 0.5;
    const ComplexField psi0 = make_state(g, init);
    const Propagator prop(g, with_masses({1.0}));
    const TheoryParams params{1.0, 1.0, {}};
    const double lambda = params.lambda_rate;
    const std::size_t samples = pick(o.quick, 20000, 5000);
    const std::size_t t_bins = 6, cells = g.cells();
    std::vector<double> edges;
    for (std::size_t k = 0; k < t_bins; ++k)
        edges.push_back(-std::log(1.0 - static_cast<double>(k) / t_bins) / lambda);
    edges.push_back(60.0 / lambda);

    std::vector<Flash> first(samples);
    parallel_for(samples, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed, i);
        first[i] = run_grw_collapse(psi0, 0.0, 200.0 / lambda, prop, params, rng, first_flashes(1)).history[0];
    });
    std::vector<double> observed(t_bins * cells, 0.0);
    for (const auto& f : first) {
        std::size_t b = 0;
        while (b + 1 < t_bins && f.t >= edges[b + 1]) ++b;
        const auto c = static_cast<std::size_t>(std::floor((f.x - g.origin()) / g.dx() + 0.5)) % cells;
        observed[b * cells + c] += 1.0;
    }

    // P(bin) = integral over the time bin of exp(-lambda t) times the cell
    // mass of the rate density of the linearly evolved state.
    std::vector<double> expected(t_bins * cells, 0.0);
    for (std::size_t b = 0; b < t_bins; ++b) {
        const int panels = b + 1 == t_bins ? 40 : 4;
        const double h = (edges[b + 1] - edges[b]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = edges[b] + p * h;
            for (std::size_t c = 0; c < cells; ++c) {
                expected[b * cells + c] += boost::math::quadrature::gauss<double, 10>::integrate(
                    [&](double t) {
                        return std::exp(-lambda * t) *
                               collapse_rate_density(prop.evolve(psi0, t), 0, params).values[c] * g.dx();
                    },
                    lo, lo + h);
            }
        }
    }
    auto r = chi_square_counts(observed, expected, "first_flash_vs_joint_density");
    r.seed = o.seed;
    return {r};
}

std::vector<TestReport> grwf_formulations(const SuiteOptions& o) {
    Setup s(preset("cat"));
    const auto& params = s.cfg.params;
    GrwOptions quiet;
    quiet.checkpoints = 0;
    quiet.keep_checkpoints = false;

    const std::size_t coupled = pick(o.quick, 100, 50);
    std::vector<char> same(coupled, 0);
    parallel_for(coupled, [&](std::size_t i) {
        Rng a = Rng::stream(o.seed, i), b = Rng::stream(o.seed, i);
        const auto c = run_grw_collapse(s.psi0, 0.0, 5.0, s.prop, params, a, quiet);
        const auto l = run_grw_linear(s.psi0, 0.0, 5.0, s.prop, params, b);
        same[i] = c.history == l.history && !c.history.empty();
    });
    const auto identical = static_cast<std::size_t>(std::count(same.begin(), same.end(), 1));

    const std::size_t n = pick(o.quick, 5000, 1000);
    std::vector<Flash> c1(n), c2(n), l1(n), l2(n);
    parallel_for(n, [&](std::size_t i) {
        Rng a = Rng::stream(o.seed + 1, i), b = Rng::stream(o.seed + 2, i);
        const auto c = run_grw_collapse(s.psi0, 0.0, 200.0, s.prop, params, a, first_flashes(2));
        const auto l = run_grw_linear(s.psi0, 0.0, 200.0, s.prop, params, b, 2);
        c1[i] = c.history[0];
        c2[i] = c.history[1];
        l1[i] = l.history[0];
        l2[i] = l.history[1];
    });
    auto column = [](const std::vector<Flash>& v, bool time) {
        std::vector<double> out;
        for (const auto& f : v) out.push_back(time ? f.t : f.x);
        return out;
    };
    auto ks = combine_bonferroni({ks_two_sample(column(c1, true), column(l1, true), "t1"),
                                  ks_two_sample(column(c1, false), column(l1, false), "x1"),
                                  ks_two_sample(column(c2, true), column(l2, true), "t2"),
                                  ks_two_sample(column(c2, false), column(l2, false), "x2")},
                                 "collapse_vs_linear_first_two_flashes");
    ks.seed = o.seed;

    const std::size_t recon = pick(o.quick, 100, 30);
    std::vector<double> worst(recon, 1.0);
    parallel_for(recon, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed + 3, i);
        const auto run = run_grw_collapse(s.psi0, 0.0, 5.0, s.prop, params, rng);
        for (const auto& cp : run.checkpoints) {
            const auto rec = reconstruct_collapsed(s.prop.evolve(s.psi0, cp.t), cp.t, run.history.until(cp.t),
                                                   s.prop, params);
            worst[i] = std::min(worst[i], fidelity(rec, cp.psi));
        }
    });
    const double min_fid = *std::min_element(worst.begin(), worst.end());
    return {measured("coupled_runs_identical", "identical_fraction",
                     static_cast<double>(identical) / static_cast<double>(coupled), 1.0, identical == coupled),
            ks,
            measured("heisenberg_reconstruction", "min_fidelity", min_fid, 1.0 - 1e-8, min_fid >= 1.0 - 1e-8)};
}

std::vector<TestReport> bm_bmc(const SuiteOptions& o) {
    double worst_dev = 0.0, worst_ratio = 1e300;
    for (const char* name : {"cat", "free_packet"}) {
        Setup s(preset(name));
        const double sigma = s.cfg.params.sigma, L = s.grid.length();
        const auto vb = bm_field(s.prop, s.psi0);
        const auto vc = bmc_field(s.prop, s.psi0, sigma);
        const EquilibriumSampler sampler(s.psi0);
        const std::size_t n = pick(o.quick, 8, 3);
        std::vector<Config> starts(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = Rng::stream(o.seed, i);
            starts[i] = sampler.draw(rng);
        }
        std::vector<double> dev(n, 0.0);
        parallel_for(n, [&](std::size_t i) {
            const auto a = integrate_trajectory(vb, s.grid, starts[i], 0.0, 1.0, 0.01);
            const auto b = integrate_trajectory(vc, s.grid, starts[i], 0.0, 1.0, 0.01);
            for (std::size_t k = 0; k < a.size(); ++k)
                dev[i] = std::max(dev[i], std::abs(a.unwrapped(k, L)[0] - b.unwrapped(k, L)[0]) / L);
        });
        worst_dev = std::max(worst_dev, *std::max_element(dev.begin(), dev.end()));

        const double tc = 0.5;
        auto Q_at = [&](double t) { return integrate_trajectory(vb, s.grid, starts[0], 0.0, t, 0.001).configs.back(); };
        auto psiC = [&](double t) { return bmc_transform(s.prop.evolve(s.psi0, t), Q_at(t), sigma); };
        const ComplexField mid = psiC(tc);
        std::vector<double> res;
        for (double dt : {0.04, 0.02, 0.01})
            res.push_back(bmc_pde_residual({psiC(tc - dt), mid, psiC(tc + dt), Q_at(tc)}, dt, sigma, s.prop));
        for (std::size_t k = 0; k + 1 < res.size(); ++k) worst_ratio = std::min(worst_ratio, res[k] / res[k + 1]);
    }
    return {measured("bm_vs_bmc_trajectories", "max_deviation_over_L", worst_dev, 1e-6, worst_dev <= 1e-6),
            measured("bmc_pde_residual_convergence", "min_halving_ratio", worst_ratio, 3.5, worst_ratio >= 3.5,
                     "residual of the collapsed-wave-function equation under step halving")};
}

std::vector<TestReport> galilean(const SuiteOptions& o) {
    Setup s(preset("free_packet"));
    const double v = 3.0 * boost_quantum(s.grid, s.h.masses[0], s.h.hbar);
    const double sigma = s.cfg.params.sigma, L = s.grid.length();
    const std::size_t n_cells = s.grid.cells();

    Rng rng(o.seed);
    double defect = 0.0;
    for (int k = 0; k < 4; ++k) {
        std::vector<cplx> vals(n_cells, 0.0);
        for (int m = -16; m <= 16; ++m) {
            const cplx c(rng.normal(), rng.normal());
            for (std::size_t j = 0; j < n_cells; ++j)
                vals[j] += c * std::polar(1.0, 2.0 * std::numbers::pi * m * static_cast<double>(j) / n_cells);
        }
        const ComplexField phi = ComplexField(s.grid, vals).normalized();
        for (double t : {0.3, 1.7})
            for (double x : {-3.3, 0.4, 5.0}) defect = std::max(defect, boost_commutation_defect(phi, v, t, x, 0, sigma, s.h));
    }

    const ComplexField boosted0 = boost_wavefunction(s.psi0, v, 0.0, s.h);
    const auto va = bm_field(s.prop, s.psi0);
    const auto vb = bm_field(s.prop, boosted0);
    const EquilibriumSampler sampler(s.psi0);
    const std::size_t nt = pick(o.quick, 5, 2);
    std::vector<double> dev(nt, 0.0);
    parallel_for(nt, [&](std::size_t i) {
        Rng r = Rng::stream(o.seed, i);
        const Config q0 = sampler.draw(r);
        const auto a = boost_trajectory(integrate_trajectory(va, s.grid, q0, 0.0, 2.0, 0.01), v, s.grid);
        const auto b = integrate_trajectory(vb, s.grid, q0, 0.0, 2.0, 0.01);
        for (std::size_t k = 0; k < a.size(); ++k)
            dev[i] = std::max(dev[i], std::abs(a.unwrapped(k, L)[0] - b.unwrapped(k, L)[0]) / L);
    });
    const double traj_dev = *std::max_element(dev.begin(), dev.end());

    const std::size_t n = pick(o.quick, 3000, 1000);
    std::vector<double> ta(n), xa(n), tb(n), xb(n);
    parallel_for(n, [&](std::size_t i) {
        Rng ra = Rng::stream(o.seed + 1, i), rb = Rng::stream(o.seed + 2, i);
        const auto a = run_grw_collapse(s.psi0, 0.0, 200.0, s.prop, s.cfg.params, ra, first_flashes(1));
        const auto b = run_grw_collapse(boosted0, 0.0, 200.0, s.prop, s.cfg.params, rb, first_flashes(1));
        ta[i] = a.history[0].t;
        xa[i] = s.grid.wrap(a.history[0].x + v * a.history[0].t);
        tb[i] = b.history[0].t;
        xb[i] = b.history[0].x;
    });
    auto ks = combine_bonferroni({ks_two_sample(ta, tb, "t"), ks_two_sample(xa, xb, "x")},
                                 "boosted_first_flash");
    ks.seed = o.seed;
    return {measured("boost_collapse_commutation", "max_defect", defect, 1e-10, defect <= 1e-10),
            measured("boosted_trajectory", "max_deviation_over_L", traj_dev, 1e-5, traj_dev <= 1e-5), ks};
}

std::vector<TestReport> discrimination(const SuiteOptions& o) {
    Setup s(preset("cat"));
    InitialState one;
    one.width = s.cfg.initial.width;
    one.centers = {s.cfg.initial.centers[0]};
    const ComplexField A = make_state(s.grid, one);
    one.centers = {s.cfg.initial.centers[1]};
    const ComplexField B = make_state(s.grid, one);
    std::vector<cplx> plus(A.size()), minus(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) {
        plus[i] = A[i] + B[i];
        minus[i] = A[i] - B[i];
    }
    const EnsembleSpec mu{{0.5, ComplexField(s.grid, plus).normalized()},
                          {0.5, ComplexField(s.grid, minus).normalized()}};
    const EnsembleSpec mu_prime{{0.5, A}, {0.5, B}};
    DiscriminationOptions d;
    d.seed = o.seed;
    d.n = pick(o.quick, 5000, 1000);
    d.region = {"A", -1e300, 0.0};
    auto f = density_matrix_discrimination(mu, mu_prime, s.prop, s.cfg.params, d);
    d.branch = DiscriminationBranch::grwm_single_time;
    d.n = 200;
    auto m = density_matrix_discrimination(mu, mu_prime, s.prop, s.cfg.params, d);
    // The m-field branch is expected to separate the ensembles.
    return {f, m};
}

std::vector<TestReport> grwm_grwf(const SuiteOptions& o) {
    RunConfig cfg = preset("cat");
    cfg.n_particles = 2;
    cfg.hamiltonian.masses = {cfg.hamiltonian.masses[0], cfg.hamiltonian.masses[0]};
    Setup s(cfg);
    EquivalenceOptions e;
    e.n_runs = pick(o.quick, 500, 200);
    e.seed = o.seed;
    e.t_max = 5.0;
    e.readout.regions = s.cfg.regions;
    e.readout.window_begin = 1.0;
    e.readout.window_end = 5.0;
    return {check_grwm_grwf_empirical_equivalence(s.psi0, s.prop, s.cfg.params, e)};
}

std::vector<TestReport> variants(const SuiteOptions& o) {
    std::vector<TestReport> out;
    {
        Setup s(preset("free_packet"));
        const std::size_t runs = pick(o.quick, 2000, 500);
        std::vector<double> counts(runs);
        parallel_for(runs, [&](std::size_t i) {
            Rng rng = Rng::stream(o.seed, i);
            counts[i] = static_cast<double>(run_sf(s.psi0, 0.0, 5.0, s.prop, s.cfg.params, rng).size());
        });
        const auto st = mean_stats(counts);
        const double ratio = st.variance / st.mean;
        const double se = std::sqrt(1.0 / (runs * st.mean) + 2.0 / (runs - 1.0));
        out.push_back(measured("sf_poisson_dispersion", "variance_over_mean", ratio, 1.0,
                               std::abs(ratio - 1.0) <= 3.0 * se, fmt("|ratio - 1| <= 3 SE, SE %.4f", se)));
    }
    {
        // One particle: the conditional law of a flash at T is |psi_T|^2.
        Setup s(preset("free_packet"));
        const std::size_t runs = pick(o.quick, 2000, 500);
        std::vector<double> u(runs);
        parallel_for(runs, [&](std::size_t i) {
            Rng rng = Rng::stream(o.seed + 1, i);
            const auto run = run_sf_prime(s.psi0, 0.0, 200.0, s.prop, s.cfg.params, rng, 1);
            const auto& f = run.history[0];
            u[i] = density_cdf(marginal(s.prop.evolve(s.psi0, f.t), 0), f.x);
        });
        out.push_back(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }, "sf_prime_single_particle_pit"));
    }
    {
        Setup s(preset("cat"));
        TheoryParams params = s.cfg.params;
        params.lambda_rate = 8.0;
        const EquilibriumSampler sampler(s.psi0);
        const std::size_t runs = pick(o.quick, 200, 50);
        std::vector<char> confined(runs, 0);
        parallel_for(runs, [&](std::size_t i) {
            Rng rng = Rng::stream(o.seed + 2, i);
            Config q = sampler.draw(rng);
            ComplexField psi = s.psi0;
            double t = 0.0;
            bool ok = true, collapsed = false, left = true;
            while (!collapsed && t < 100.0) {
                const auto seg = run_grwp(psi, q, t, t + 0.25, s.prop, params, rng, 0.01);
                if (!seg.flashes.empty()) {
                    collapsed = true;
                    left = seg.flashes[0].x < 0.0;
                    for (std::size_t k = 0; k < seg.trajectory.size(); ++k)
                        if (seg.trajectory.times[k] >= seg.flashes[0].t && (seg.trajectory.configs[k][0] < 0.0) != left)
                            ok = false;
                    const auto m = marginal(seg.final_state.normalized(), 0);
                    double leak = 0.0;
                    for (std::size_t j = 0; j < m.cells; ++j)
                        if ((m.position(j) < 0.0) != left) leak += m.values[j] * m.dx();
                    ok = ok && leak <= 1e-6;
                }
                psi = seg.final_state;
                q = seg.trajectory.configs.back();
                t += 0.25;
            }
            const auto follow = run_grwp(psi, q, t, t + 1.0, s.prop, params, rng, 0.01);
            for (const auto& c : follow.trajectory.configs)
                if ((c[0] < 0.0) != left) ok = false;
            confined[i] = collapsed && ok;
        });
        const auto good = static_cast<std::size_t>(std::count(confined.begin(), confined.end(), 1));
        out.push_back(measured("grwp_branch_confinement", "confined_fraction",
                               static_cast<double>(good) / static_cast<double>(runs), 1.0, good == runs,
                               "lambda = 8; followed for one time unit after the first collapse"));
    }
    {
        RunConfig cfg = preset("harmonic");
        cfg.initial.centers = {0.0};
        Setup s(cfg);
        const std::size_t n = pick(o.quick, 5000, 2000);
        std::vector<double> times;
        for (std::size_t k = 0; k < n; ++k) times.push_back(0.01 * static_cast<double>(k));
        Rng rng(o.seed);
        const auto qs = run_bmw(s.psi0, 0.0, times, s.prop, rng);
        std::vector<double> a, b;
        for (std::size_t k = 0; k + 1 < qs.size(); ++k) {
            a.push_back(qs[k][0]);
            b.push_back(qs[k + 1][0]);
        }
        const double r = pearson(a, b);
        const double bound = 3.0 / std::sqrt(static_cast<double>(a.size()));
        out.push_back(measured("bmw_successive_independence", "pearson_r", r, bound, std::abs(r) < bound));
    }
    return out;
}

std::vector<TestReport> warming(const SuiteOptions& o) {
    Setup s(preset("free_packet"));
    const auto& params = s.cfg.params;
    const std::size_t runs = pick(o.quick, 500, 150), marks = 20;
    std::vector<std::vector<double>> energy(runs);
    parallel_for(runs, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed, i);
        GrwOptions opts;
        opts.checkpoints = marks;
        const auto run = run_grw_collapse(s.psi0, 0.0, 5.0, s.prop, params, rng, opts);
        for (const auto& cp : run.checkpoints)
            if (!cp.after_flash) energy[i].push_back(s.prop.expected_energy(cp.psi));
    });
    double worst_z = 1e300;
    for (std::size_t k = 0; k < marks; ++k) {
        std::vector<double> d;
        for (const auto& e : energy) d.push_back(e[k + 1] - e[k]);
        const auto st = mean_stats(d);
        worst_z = std::min(worst_z, st.mean / st.standard_error);
    }

    const double jump = mean_collapse_energy_jump(s.psi0, 0, s.prop, params.sigma);
    const std::size_t draws = pick(o.quick, 20000, 5000);
    std::vector<double> dE(draws);
    const double e0 = s.prop.expected_energy(s.psi0);
    parallel_for(draws, [&](std::size_t i) {
        Rng rng = Rng::stream(o.seed + 1, i);
        const Flash f = draw_flash(s.psi0, 0.0, params, rng);
        dE[i] = s.prop.expected_energy(apply_collapse(s.psi0, 0, f.x, params.sigma)) - e0;
    });
    const auto st = mean_stats(dE);
    const double rel = std::abs(st.mean / jump - 1.0);
    return {measured("energy_increase_between_checkpoints", "min_standardized_increment", worst_z, -3.0,
                     worst_z >= -3.0),
            measured("mean_energy_jump", "rel_error_vs_quadrature", rel, 0.05, rel <= 0.05,
                     fmt("Monte Carlo %.4f, quadrature %.4f", st.mean, jump))};
}

std::vector<TestReport> projective(const SuiteOptions& o) {
    Setup s(preset("entangled_pair"));
    const auto& params = s.cfg.params;
    const EquilibriumSampler base(s.psi0);
    std::vector<Config> points;
    for (std::size_t i = 0; i < 40; ++i) {
        Rng rng = Rng::stream(o.seed, i);
        points.push_back(base.draw(rng));
    }
    double worst = 0.0;
    bool same = true;
    for (const cplx c : {cplx(2.0, 0.0), cplx(0.0, 1.0), cplx(-0.3, 0.4)}) {
        const ComplexField psi = s.psi0.scaled(c);
        for (std::size_t a = 0; a < 2; ++a) {
            const auto r0 = collapse_rate_density(s.psi0, a, params), r1 = collapse_rate_density(psi, a, params);
            for (std::size_t j = 0; j < r0.cells; ++j) worst = std::max(worst, std::abs(r0.values[j] - r1.values[j]));
        }
        for (const auto& q : points)
            for (const auto mode : {Interpolation::multilinear, Interpolation::spectral}) {
                const Config v0 = bohm_velocity(s.psi0, q, s.h, mode), v1 = bohm_velocity(psi, q, s.h, mode);
                for (std::size_t a = 0; a < 2; ++a) worst = std::max(worst, std::abs(v0[a] - v1[a]));
            }
        const FlashHistory h({Flash{0.3, -1.9, 1}, Flash{0.8, 2.2, 2}});
        worst = std::max(worst, std::abs(flash_joint_density(h, s.psi0, 0.0, s.prop, params, 1.0) -
                                         flash_joint_density(h, psi, 0.0, s.prop, params, 1.0)));
        const EquilibriumSampler sampler(psi);
        for (std::size_t i = 0; i < 50; ++i) {
            Rng a = Rng::stream(o.seed + 1, i), b = Rng::stream(o.seed + 1, i);
            if (base.draw(a) != sampler.draw(b)) same = false;
            if (!(draw_flash(s.psi0, 0.0, params, a) == draw_flash(psi, 0.0, params, b))) same = false;
        }
    }
    return {measured("ray_invariance", "max_abs_difference", worst, 1e-12, worst <= 1e-12,
                     "rate densities, velocities, joint densities under psi -> c psi"),
            measured("ray_invariant_draws", "identical", same ? 1.0 : 0.0, 1.0, same)};
}

std::vector<TestReport> generalized_equivariance(const SuiteOptions& o) {
    Setup s(preset("cat"));
    std::vector<TestReport> out;
    for (auto theory : {CollapseTheory::grwf, CollapseTheory::grwm}) {
        GeneralizedEquivarianceOptions g;
        g.theory = theory;
        g.t_shift = 1.0;
        g.n = pick(o.quick, 3000, 1000);
        g.seed = o.seed;
        out.push_back(check_generalized_equivariance(s.psi0, s.prop, s.cfg.params, g));
        g.restart_from_linear = true;
        const auto control = check_generalized_equivariance(s.psi0, s.prop, s.cfg.params, g);
        auto r = control;
        r.name = control.name + "_negative_control";
        r.verdict = control.verdict == Verdict::fail ? Verdict::pass : Verdict::fail;
        r.note = "restarting from the linear state must be rejected; " + control.note;
        out.push_back(r);
    }
    return out;
}

using SuiteFn = std::function<std::vector<TestReport>(const SuiteOptions&)>;

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> r{
        {"unitarity", unitarity},
        {"equivariance", equivariance},
        {"grw_sampler", grw_sampler},
        {"grwf_formulations", grwf_formulations},
        {"bm_bmc", bm_bmc},
        {"galilean", galilean},
        {"discrimination", discrimination},
        {"grwm_grwf", grwm_grwf},
        {"variants", variants},
        {"warming", warming},
        {"projective", projective},
        {"generalized_equivariance", generalized_equivariance},
    };
    return r;
}

}  // namespace

bool SuiteResult::passed() const {
    return !reports.empty() &&
           std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.passed(); });
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, _] : registry()) v.push_back(name);
        return v;
    }();
    return names;
}

bool is_suite(const std::string& name) {
    const auto& n = suite_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
    for (const auto& [n, fn] : registry()) {
        if (n != name) continue;
        SuiteResult r;
        r.name = name;
        const auto start = std::chrono::steady_clock::now();
        r.reports = fn(options);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    }
    throw ConfigError("unknown suite '" + name + "'");
}

json to_json(const SuiteResult& r) {
    json reports = json::array();
    for (const auto& t : r.reports) reports.push_back(to_json(t));
    return {{"suite", r.name}, {"passed", r.passed()}, {"seconds", r.seconds}, {"reports", reports}};
}

json summarize(const std::vector<SuiteResult>& results, const SuiteOptions& options) {
    json suites = json::array();
    bool all = !results.empty();
    for (const auto& r : results) {
        suites.push_back(to_json(r));
        all = all && r.passed();
    }
    return {{"passed", all}, {"quick", options.quick}, {"seed", options.seed}, {"suites", suites}};
}

}  // namespace qwo
