#include "qwo/grw.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qwo/error.hpp"

namespace qwo {

void TheoryParams::validate(std::size_t n_labels) const {
    if (!(lambda_rate > 0.0) || !std::isfinite(lambda_rate))
        throw std::invalid_argument("lambda_rate must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
    if (!per_label_rates.empty()) {
        if (per_label_rates.size() != n_labels)
            throw std::invalid_argument("per_label_rates needs one rate per particle");
        for (double r : per_label_rates)
            if (!(r > 0.0)) throw std::invalid_argument("per_label_rates must be positive");
    }
}

double TheoryParams::total_rate(std::size_t n_labels) const {
    double s = 0.0;
    for (std::size_t a = 0; a < n_labels; ++a) s += rate(a);
    return s;
}

std::vector<double> TheoryParams::rates(std::size_t n_labels) const {
    std::vector<double> r(n_labels);
    for (std::size_t a = 0; a < n_labels; ++a) r[a] = rate(a);
    return r;
}

FlashHistory::FlashHistory(std::vector<Flash> flashes) {
    for (const auto& f : flashes) push(f);
}

void FlashHistory::push(const Flash& f) {
    if (!std::isfinite(f.t) || !std::isfinite(f.x)) throw std::invalid_argument("flash is not finite");
    if (f.label < 1 || f.label > static_cast<int>(kMaxParticles))
        throw std::invalid_argument("flash label out of range");
    if (!flashes_.empty() && !(f.t > flashes_.back().t))
        throw std::invalid_argument("flash times must be strictly increasing");
    flashes_.push_back(f);
}

FlashHistory FlashHistory::until(double time) const {
    FlashHistory out;
    for (const auto& f : flashes_) {
        if (f.t > time) break;
        out.flashes_.push_back(f);
    }
    return out;
}

namespace {

std::vector<double> sqrt_kernel(const GridSpec& g, double center, double sigma) {
    const double c = wrapped_gaussian_norm(g.cells(), g.length(), sigma);
    std::vector<double> f(g.cells());
    for (std::size_t j = 0; j < g.cells(); ++j)
        f[j] = std::sqrt(c * wrapped_gaussian(g.position(j) - center, sigma, g.length()));
    return f;
}

void check_label(const GridSpec& g, std::size_t axis) {
    if (axis >= g.n_particles()) throw std::out_of_range("collapse label out of range");
}

double normalize_or_fail(ComplexField& psi, const char* what) {
    const double n = norm(psi);
    if (!(n > 1e-12))
        throw NumericalFailure(std::string(what) + ": collapse annihilates the state (norm " +
                               std::to_string(n) + ")");
    psi = psi.scaled(1.0 / n);
    return n;
}

}  // namespace

ComplexField collapse_sqrt(const ComplexField& psi, std::size_t axis, double center,
                           double sigma) {
    const auto& g = psi.grid();
    check_label(g, axis);
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    const auto f = sqrt_kernel(g, center, sigma);
    const std::size_t s = g.stride(axis);
    const std::size_t n = g.cells();
    std::vector<cplx> out(psi.values().begin(), psi.values().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= f[(i / s) % n];
    return ComplexField(g, std::move(out));
}

ComplexField apply_collapse(const ComplexField& psi, std::size_t axis, double center,
                            double sigma) {
    auto out = collapse_sqrt(psi, axis, center, sigma);
    normalize_or_fail(out, "apply_collapse");
    return out;
}

RealField1D collapse_rate_density(const ComplexField& psi, std::size_t axis,
                                  const TheoryParams& params) {
    check_label(psi.grid(), axis);
    auto d = gaussian_smooth(normalized_marginal(psi, axis), params.sigma);
    for (auto& v : d.values) v *= params.rate(axis);
    return d;
}

Flash draw_flash(const ComplexField& psi, double t, const TheoryParams& params, Rng& rng) {
    const std::size_t n = psi.grid().n_particles();
    const auto rates = params.rates(n);
    const std::size_t axis = rng.discrete(rates);
    const auto density = collapse_rate_density(psi, axis, params);
    const double x = sample_density(density, rng);
    return Flash{t, x, static_cast<int>(axis + 1)};
}

GrwRun run_grw_collapse(const ComplexField& psi0, double t0, double t_max,
                        const Propagator& prop, const TheoryParams& params, Rng& rng,
                        const GrwOptions& options) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    const std::size_t n = psi0.grid().n_particles();
    params.validate(n);
    const double total = params.total_rate(n);

    GrwRun run{FlashHistory{}, {}, psi0, t0};
    ComplexField psi = psi0;
    double t = t0;
    if (options.keep_checkpoints) run.checkpoints.push_back({t0, psi, false});

    std::vector<double> marks;
    if (options.checkpoints > 0 && t_max > t0)
        for (std::size_t k = 1; k <= options.checkpoints; ++k)
            marks.push_back(t0 + (t_max - t0) * static_cast<double>(k) /
                                     static_cast<double>(options.checkpoints));
    std::size_t next_mark = 0;

    auto advance = [&](double target) {
        while (next_mark < marks.size() && marks[next_mark] <= target) {
            psi = prop.evolve(psi, marks[next_mark] - t);
            t = marks[next_mark++];
            if (options.keep_checkpoints) run.checkpoints.push_back({t, psi, false});
        }
        if (target > t) {
            psi = prop.evolve(psi, target - t);
            t = target;
        }
    };

    for (;;) {
        if (options.max_flashes && run.history.size() >= *options.max_flashes) break;
        const double T = t + rng.exponential(total);
        if (T > t_max) {
            advance(t_max);
            break;
        }
        advance(T);
        const Flash f = draw_flash(psi, T, params, rng);
        psi = apply_collapse(psi, f.axis(), f.x, params.sigma);
        run.history.push(f);
        if (options.keep_checkpoints) run.checkpoints.push_back({T, psi, true});
    }
    run.final_state = psi;
    run.t_end = t;
    return run;
}

double flash_joint_log_density(const FlashHistory& history, const ComplexField& psi0,
                               double t0, const Propagator& prop, const TheoryParams& params,
                               std::optional<double> t_end) {
    const std::size_t n = psi0.grid().n_particles();
    params.validate(n);
    ComplexField psi = psi0.normalized();
    double t = t0;
    double log_w = 0.0;
    for (const auto& f : history.flashes()) {
        if (f.t < t0) throw std::invalid_argument("flash precedes t0");
        if (f.axis() >= n) throw std::invalid_argument("flash label exceeds particle count");
        psi = prop.evolve(psi, f.t - t);
        t = f.t;
        auto phi = collapse_sqrt(psi, f.axis(), f.x, params.sigma);
        const double nrm = norm(phi);
        if (!(nrm > 0.0)) return -std::numeric_limits<double>::infinity();
        log_w += 2.0 * std::log(nrm) + std::log(params.rate(f.axis()));
        psi = phi.scaled(1.0 / nrm);
    }
    double horizon = t;
    if (t_end) {
        if (*t_end < t) throw std::invalid_argument("t_end precedes the last flash");
        horizon = *t_end;
    }
    return log_w - params.total_rate(n) * (horizon - t0);
}

double flash_joint_density(const FlashHistory& history, const ComplexField& psi0, double t0,
                           const Propagator& prop, const TheoryParams& params,
                           std::optional<double> t_end) {
    return std::exp(flash_joint_log_density(history, psi0, t0, prop, params, t_end));
}

ComplexField HeisenbergCollapse::apply(const ComplexField& psi, double eval_time,
                                       const Propagator& prop, double sigma) const {
    auto back = prop.evolve(psi, flash_time - eval_time);
    return prop.evolve(collapse_sqrt(back, axis, center, sigma), eval_time - flash_time);
}

ComplexField reconstruct_collapsed(const ComplexField& psiL_t, double t,
                                   const FlashHistory& history, const Propagator& prop,
                                   const TheoryParams& params) {
    ComplexField psi = psiL_t;
    normalize_or_fail(psi, "reconstruct_collapsed");
    for (const auto& f : history.flashes()) {
        if (f.t > t) throw std::invalid_argument("reconstruct_collapsed: flash after evaluation time");
        psi = HeisenbergCollapse{f.axis(), f.x, f.t}.apply(psi, t, prop, params.sigma);
        normalize_or_fail(psi, "reconstruct_collapsed");
    }
    return psi;
}

LinearRun run_grw_linear(const ComplexField& psi0, double t0, double t_max,
                         const Propagator& prop, const TheoryParams& params, Rng& rng,
                         std::optional<std::size_t> max_flashes) {
    if (!(t_max >= t0)) throw std::invalid_argument("t_max must not precede t0");
    const std::size_t n = psi0.grid().n_particles();
    params.validate(n);
    const double total = params.total_rate(n);

    LinearRun run{FlashHistory{}, psi0, t0};
    ComplexField psiL = psi0;
    double t = t0;
    for (;;) {
        if (max_flashes && run.history.size() >= *max_flashes) break;
        const double T = t + rng.exponential(total);
        if (T > t_max) {
            psiL = prop.evolve(psiL, t_max - t);
            t = t_max;
            break;
        }
        psiL = prop.evolve(psiL, T - t);
        t = T;
        const auto conditional = reconstruct_collapsed(psiL, T, run.history, prop, params);
        run.history.push(draw_flash(conditional, T, params, rng));
    }
    run.final_linear = psiL;
    run.t_end = t;
    return run;
}

double mean_collapse_energy_jump(const ComplexField& psi, std::size_t axis,
                                 const Propagator& prop, double sigma) {
    const auto& g = psi.grid();
    const ComplexField unit = psi.normalized();
    const double before = prop.expected_energy(unit);
    double after = 0.0;
    for (std::size_t j = 0; j < g.cells(); ++j) {
        const auto phi = collapse_sqrt(unit, axis, g.position(j), sigma);
        const double w = norm(phi);
        if (w * w < 1e-300) continue;
        after += w * w * prop.expected_energy(phi) * g.dx();
    }
    return after - before;
}

}  // namespace qwo
