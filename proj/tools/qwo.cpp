// qwo: simulate, oracle and check subcommands.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qwo/bohm.hpp"
#include "qwo/config.hpp"
#include "qwo/error.hpp"
#include "qwo/io.hpp"
#include "qwo/ontology.hpp"
#include "qwo/parallel.hpp"
#include "qwo/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qwo;

namespace {

enum Exit { ok = 0, check_failed = 1, config_error = 2, numerical_failure = 3 };

struct Common {
    std::string config_file;
    std::string preset;
    std::optional<std::string> theory;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<double> t_max;
    std::optional<double> lambda;
    std::optional<double> sigma;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_file, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "built-in preset");
    cmd->add_option("--theory", c.theory, "bm, grwf, grwf_linear, grwm, sm, sf, sf_prime, grwp, bmw");
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--t-max", c.t_max, "final time");
    cmd->add_option("--lambda", c.lambda, "collapse rate per particle");
    cmd->add_option("--sigma", c.sigma, "collapse width");
}

// Config file, then preset, then flags; later sources win.
RunConfig resolve(const Common& c) {
    json j = json::object();
    if (!c.config_file.empty()) {
        try {
            j = json::parse(read_file(c.config_file));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (!c.preset.empty()) j["preset"] = c.preset;
    if (c.theory) j["theory"] = *c.theory;
    if (c.seed) j["seed"] = *c.seed;
    if (c.runs) j["runs"] = *c.runs;
    if (c.t_max) j["t_max"] = *c.t_max;
    if (c.lambda) j["params"]["lambda_rate"] = *c.lambda;
    if (c.sigma) j["params"]["sigma"] = *c.sigma;
    if (c.out) j["output_dir"] = *c.out;
    RunConfig cfg = parse_config(j);
    cfg.validate();
    return cfg;
}

// Seed stream family of a theory. Coupled theories share the family of the
// formulation they are equivalent in law to.
Theory seed_family(Theory t, bool couple) {
    if (!couple) return t;
    switch (t) {
        case Theory::grwf_linear:
        case Theory::grwm: return Theory::grwf;
        case Theory::bmw: return Theory::bm;
        default: return t;
    }
}

std::uint64_t run_seed(const RunConfig& cfg, std::size_t run, bool couple) {
    const auto family = static_cast<std::uint64_t>(seed_family(cfg.theory, couple));
    return stream_seed(cfg.seed ^ splitmix64(family), run);
}

std::vector<double> sample_times(const RunConfig& cfg) {
    if (!cfg.sample_times.empty()) return cfg.sample_times;
    std::vector<double> t;
    for (std::size_t k = 0; k <= cfg.checkpoints; ++k)
        t.push_back(cfg.t0 + (cfg.t_max - cfg.t0) * static_cast<double>(k) / static_cast<double>(cfg.checkpoints));
    return t;
}

Trajectory as_trajectory(const std::vector<double>& times, const std::vector<Config>& qs, std::size_t n) {
    Trajectory tr;
    tr.n_particles = n;
    tr.times = times;
    tr.configs = qs;
    tr.windings.assign(qs.size(), {});
    return tr;
}

void simulate_run(const RunConfig& cfg, const ComplexField& psi0, const Propagator& prop, std::size_t run,
                  bool couple, const fs::path& dir) {
    RunRecord rec;
    rec.master_seed = cfg.seed;
    rec.run_index = run;
    rec.stream_seed = run_seed(cfg, run, couple);
    rec.theory = cfg.theory;
    rec.params = cfg.params;
    rec.grid = cfg.grid();
    rec.hamiltonian_digest = hamiltonian_digest(prop.spec());
    rec.initial_state = {{"preset", cfg.preset}, {"state", to_json(cfg)["initial_state"]}};
    rec.t0 = cfg.t0;
    rec.t_max = cfg.t_max;
    const json header = to_json(rec);

    char stem[32];
    std::snprintf(stem, sizeof stem, "run_%05zu", run);
    const auto flashes = dir / (std::string(stem) + ".flashes.jsonl");
    const auto density = dir / (std::string(stem) + ".density.bin");
    const auto trajectory = dir / (std::string(stem) + ".trajectory.csv");

    Rng rng(rec.stream_seed);
    GrwOptions quiet;
    quiet.checkpoints = 0;
    quiet.keep_checkpoints = false;
    auto initial_config = [&] {
        if (!cfg.q0) return sample_equilibrium(psi0, rng);
        Config q{};
        std::copy(cfg.q0->begin(), cfg.q0->end(), q.begin());
        return q;
    };

    switch (cfg.theory) {
        case Theory::bm: {
            const Config q0 = initial_config();
            const auto path = PsiPath::unitary(psi0, prop, cfg.t0, cfg.t_max, cfg.dt, cfg.interpolation);
            atomic_write(trajectory, encode_trajectory(integrate_trajectory(path, prop.spec(), q0, cfg.t0, cfg.t_max, cfg.dt), header));
            break;
        }
        case Theory::grwf:
            atomic_write(flashes, encode_flashes(run_grw_collapse(psi0, cfg.t0, cfg.t_max, prop, cfg.params, rng, quiet).history, header));
            break;
        case Theory::grwf_linear:
            atomic_write(flashes, encode_flashes(run_grw_linear(psi0, cfg.t0, cfg.t_max, prop, cfg.params, rng).history, header));
            break;
        case Theory::grwm: {
            GrwOptions o;
            o.checkpoints = cfg.checkpoints;
            atomic_write(density, encode_matter_density(run_grwm(psi0, cfg.t0, cfg.t_max, prop, cfg.params, rng, o).density, header));
            break;
        }
        case Theory::sm:
            atomic_write(density, encode_matter_density(run_sm(psi0, cfg.t0, cfg.t_max, prop, cfg.checkpoints), header));
            break;
        case Theory::sf:
            atomic_write(flashes, encode_flashes(run_sf(psi0, cfg.t0, cfg.t_max, prop, cfg.params, rng, cfg.sigma_zero), header));
            break;
        case Theory::sf_prime:
            atomic_write(flashes, encode_flashes(run_sf_prime(psi0, cfg.t0, cfg.t_max, prop, cfg.params, rng).history, header));
            break;
        case Theory::grwp: {
            const Config q0 = initial_config();
            const auto r = run_grwp(psi0, q0, cfg.t0, cfg.t_max, prop, cfg.params, rng, cfg.dt, cfg.interpolation);
            atomic_write(trajectory, encode_trajectory(r.trajectory, header));
            atomic_write(flashes, encode_flashes(r.flashes, header));
            break;
        }
        case Theory::bmw: {
            const auto times = sample_times(cfg);
            const auto qs = run_bmw(psi0, cfg.t0, times, prop, rng);
            atomic_write(trajectory, encode_trajectory(as_trajectory(times, qs, cfg.n_particles), header));
            break;
        }
    }
}

int cmd_simulate(const Common& c, std::size_t jobs, bool couple) {
    const RunConfig cfg = resolve(c);
    const ComplexField psi0 = make_state(cfg.grid(), cfg.initial);
    const Propagator prop(cfg.grid(), resolved_hamiltonian(cfg));
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    parallel_for(cfg.runs, [&](std::size_t i) { simulate_run(cfg, psi0, prop, i, couple, dir); }, jobs);
    std::cout << json{{"output_dir", dir.string()}, {"runs", cfg.runs}, {"theory", to_string(cfg.theory)}}.dump()
              << "\n";
    return ok;
}

int cmd_oracle(const Common& c, const std::string& history_file, std::optional<double> t_end) {
    const RunConfig cfg = resolve(c);
    const auto [record, history] = decode_flashes(read_file(history_file));
    double t0 = cfg.t0;
    if (record.contains("timestamps")) t0 = record.at("timestamps").value("t0", t0);
    const ComplexField psi0 = make_state(cfg.grid(), cfg.initial);
    const Propagator prop(cfg.grid(), resolved_hamiltonian(cfg));
    const double log_density = flash_joint_log_density(history, psi0, t0, prop, cfg.params, t_end);
    json out{{"flashes", history.size()}, {"t0", t0}, {"log_density", log_density},
             {"density", std::exp(log_density)}};
    out["t_end"] = t_end ? json(*t_end) : json(nullptr);
    std::cout << out.dump() << "\n";
    return ok;
}

int cmd_check(const std::string& selector, const SuiteOptions& options, const std::string& out) {
    std::vector<std::string> names;
    if (selector == "all") names = suite_names();
    else if (is_suite(selector)) names = {selector};
    else {
        std::string known;
        for (const auto& n : suite_names()) known += " " + n;
        throw ConfigError("unknown suite '" + selector + "'; known: all" + known);
    }
    std::vector<SuiteResult> results;
    for (const auto& n : names) {
        results.push_back(run_suite(n, options));
        std::cerr << n << ": " << (results.back().passed() ? "pass" : "FAIL") << " ("
                  << results.back().seconds << " s)\n";
    }
    const json summary = summarize(results, options);
    if (!out.empty()) atomic_write(out, summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return summary.at("passed").get<bool>() ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification of quantum theories without observers"};
    app.require_subcommand(1);

    Common sim;
    std::size_t jobs = default_jobs();
    bool couple = false;
    auto* simulate = app.add_subcommand("simulate", "run a theory and write per-run output files");
    add_common(simulate, sim);
    simulate->add_option("--runs", sim.runs, "number of independent runs");
    simulate->add_option("--out", sim.out, "output directory");
    simulate->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    simulate->add_flag("--couple-seed", couple,
                       "draw randomness from the stream of the coupled formulation (grwf_linear and grwm use grwf)");

    Common orc;
    std::string history_file;
    std::optional<double> t_end;
    auto* oracle = app.add_subcommand("oracle", "joint density of a flash history");
    add_common(oracle, orc);
    oracle->add_option("history", history_file, "flash JSONL file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--t-end", t_end, "include the probability of no further flash up to this time");

    std::string selector;
    SuiteOptions suite_options;
    std::string report_out;
    std::size_t check_jobs = default_jobs();
    auto* check = app.add_subcommand("check", "run verification suites");
    check->add_option("suite", selector, "suite name or 'all'")->required();
    check->add_flag("--quick", suite_options.quick, "smaller ensembles");
    check->add_option("--seed", suite_options.seed, "master seed");
    check->add_option("--out", report_out, "also write the summary JSON here");
    check->add_option("--jobs", check_jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*simulate) return cmd_simulate(sim, jobs, couple);
        if (*oracle) return cmd_oracle(orc, history_file, t_end);
        default_jobs() = check_jobs;
        return cmd_check(selector, suite_options, report_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    }
}
