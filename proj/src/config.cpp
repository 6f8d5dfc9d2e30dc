#include "qwo/config.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "qwo/error.hpp"
#include "qwo/io.hpp"

namespace qwo {

using nlohmann::json;

namespace {

constexpr std::pair<Theory, const char*> kTheories[] = {
    {Theory::bm, "bm"},   {Theory::grwf, "grwf"}, {Theory::grwf_linear, "grwf_linear"},
    {Theory::grwm, "grwm"}, {Theory::sm, "sm"},   {Theory::sf, "sf"},
    {Theory::sf_prime, "sf_prime"}, {Theory::grwp, "grwp"}, {Theory::bmw, "bmw"},
};

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
}

template <class T>
void take(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

json potential_json(const HamiltonianSpec& h, const std::string& file) {
    return std::visit(
        [&](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, FreePotential>) {
                return {{"kind", "free"}};
            } else if constexpr (std::is_same_v<T, HarmonicPotential>) {
                json j{{"kind", "harmonic"}, {"omega", p.omega}};
                if (p.center) j["center"] = *p.center;
                return j;
            } else if constexpr (std::is_same_v<T, DoubleWellPotential>) {
                json j{{"kind", "double_well"}, {"barrier", p.barrier}, {"separation", p.separation}};
                if (p.center) j["center"] = *p.center;
                return j;
            } else {
                json j{{"kind", "tabulated"}};
                if (!file.empty()) j["file"] = file;
                else j["values"] = p.values;
                return j;
            }
        },
        h.potential);
}

Potential potential_from(const json& j, std::string& file) {
    only_keys(j, {"kind", "omega", "center", "barrier", "separation", "file", "values"},
              "hamiltonian.potential");
    const std::string kind = j.value("kind", "free");
    std::optional<double> center;
    if (j.contains("center")) center = j.at("center").get<double>();
    if (kind == "free") return FreePotential{};
    if (kind == "harmonic") {
        HarmonicPotential p;
        take(j, "omega", p.omega);
        p.center = center;
        return p;
    }
    if (kind == "double_well") {
        DoubleWellPotential p;
        take(j, "barrier", p.barrier);
        take(j, "separation", p.separation);
        p.center = center;
        return p;
    }
    if (kind == "tabulated") {
        TabulatedPotential p;
        take(j, "values", p.values);
        take(j, "file", file);
        return p;
    }
    throw ConfigError("unknown potential kind '" + kind + "'");
}

}  // namespace

const char* to_string(Theory t) {
    for (const auto& [k, name] : kTheories)
        if (k == t) return name;
    return "?";
}

Theory parse_theory(const std::string& s) {
    for (const auto& [k, name] : kTheories)
        if (s == name) return k;
    throw ConfigError("unknown theory '" + s + "'");
}

json to_json(const HamiltonianSpec& h) {
    json j{{"masses", h.masses},
           {"hbar", h.hbar},
           {"potential", potential_json(h, "")},
           {"vector_potential", h.vector_potential},
           {"charges", h.charges},
           {"energy_offset", h.energy_offset}};
    j["max_step"] = h.max_step ? json(*h.max_step) : json(nullptr);
    return j;
}

HamiltonianSpec hamiltonian_from_json(const json& j, HamiltonianSpec h) {
    only_keys(j, {"masses", "hbar", "potential", "vector_potential", "charges", "max_step", "energy_offset"},
              "hamiltonian");
    take(j, "masses", h.masses);
    take(j, "hbar", h.hbar);
    take(j, "vector_potential", h.vector_potential);
    take(j, "charges", h.charges);
    take(j, "energy_offset", h.energy_offset);
    if (j.contains("max_step")) {
        if (j.at("max_step").is_null()) h.max_step.reset();
        else h.max_step = j.at("max_step").get<double>();
    }
    if (j.contains("potential")) {
        std::string file;
        h.potential = potential_from(j.at("potential"), file);
    }
    return h;
}

json to_json(const TheoryParams& p) {
    return {{"lambda_rate", p.lambda_rate}, {"sigma", p.sigma}, {"per_label_rates", p.per_label_rates}};
}

json to_json(const GridSpec& g) {
    return {{"n_particles", g.n_particles()},
            {"cells_per_axis", g.cells()},
            {"axis_length", g.length()},
            {"origin", g.origin()}};
}

std::string hamiltonian_digest(const HamiltonianSpec& h) {
    const std::string canonical = to_json(h).dump();
    std::uint64_t x = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        x ^= c;
        x *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

void RunConfig::validate() const {
    try {
        const GridSpec g = grid();
        if (hamiltonian.masses.size() != g.n_particles())
            throw ConfigError("hamiltonian.masses must have one entry per particle");
        params.validate(g.n_particles());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(t_max >= t0)) throw ConfigError("t_max must not precede t0");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (runs == 0) throw ConfigError("runs must be positive");
    if (q0 && q0->size() != n_particles) throw ConfigError("q0 needs one coordinate per particle");
    for (std::size_t k = 1; k < sample_times.size(); ++k)
        if (sample_times[k] < sample_times[k - 1]) throw ConfigError("sample_times must be sorted");
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"cat", "free_packet", "harmonic", "double_well",
                                                "entangled_pair"};
    return names;
}

RunConfig preset(const std::string& name) {
    RunConfig c;
    c.preset = name;
    c.params = TheoryParams{1.0, 0.5, {}};
    if (name == "free_packet") {
        c.cells_per_axis = 256;
        c.axis_length = 40.0;
        c.origin = -20.0;
        c.hamiltonian = with_masses({1.0});
        c.initial = InitialState{"gaussian", {0.0}, 1.0, 0.0, 1.0, ""};
        c.t_max = 2.0;
        c.regions = {{"A", -20.0, 0.0}, {"B", 0.0, 20.0}};
    } else if (name == "harmonic") {
        c.hamiltonian = with_masses({1.0});
        c.hamiltonian.potential = HarmonicPotential{{1.0}, 0.0};
        c.initial = InitialState{"gaussian", {1.0}, std::sqrt(0.5), 0.0, 1.0, ""};
        c.t_max = 2.0 * 3.14159265358979323846;
        c.regions = {{"A", -8.0, 0.0}, {"B", 0.0, 8.0}};
    } else if (name == "double_well") {
        c.hamiltonian = with_masses({1.0});
        c.hamiltonian.potential = DoubleWellPotential{1.0, 3.0, 0.0};
        c.initial = InitialState{"gaussian", {-1.5}, 0.4, 0.0, 1.0, ""};
        c.t_max = 5.0;
        c.regions = {{"A", -8.0, 0.0}, {"B", 0.0, 8.0}};
    } else if (name == "cat") {
        c.hamiltonian = with_masses({10.0});
        c.initial = InitialState{"cat", {-2.5, 2.5}, 0.35, 0.0, 1.0, ""};
        c.t_max = 5.0;
        c.regions = {{"A", -8.0, 0.0}, {"B", 0.0, 8.0}};
    } else if (name == "entangled_pair") {
        c.n_particles = 2;
        c.cells_per_axis = 64;
        c.hamiltonian = with_masses({1.0, 1.0});
        c.initial = InitialState{"symmetric_pair", {-2.0, 2.0}, 0.5, 0.0, 1.0, ""};
        c.t_max = 2.0;
        c.regions = {{"A", -8.0, 0.0}, {"B", 0.0, 8.0}};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["preset"] = c.preset;
    j["theory"] = to_string(c.theory);
    j["seed"] = c.seed;
    j["runs"] = c.runs;
    j["grid"] = {{"n_particles", c.n_particles},
                 {"cells_per_axis", c.cells_per_axis},
                 {"axis_length", c.axis_length},
                 {"origin", c.origin}};
    j["hamiltonian"] = to_json(c.hamiltonian);
    j["hamiltonian"]["potential"] = potential_json(c.hamiltonian, c.potential_file);
    j["params"] = to_json(c.params);
    j["initial_state"] = {{"kind", c.initial.kind},     {"centers", c.initial.centers},
                          {"width", c.initial.width},   {"momentum", c.initial.momentum},
                          {"sign", c.initial.sign},     {"path", c.initial.path}};
    j["t0"] = c.t0;
    j["t_max"] = c.t_max;
    j["checkpoints"] = c.checkpoints;
    j["dt"] = c.dt;
    j["interpolation"] = c.interpolation == Interpolation::spectral ? "spectral" : "multilinear";
    j["q0"] = c.q0 ? json(*c.q0) : json(nullptr);
    j["sample_times"] = c.sample_times;
    j["sigma_zero"] = c.sigma_zero;
    json regions = json::array();
    for (const auto& r : c.regions) regions.push_back({{"name", r.name}, {"lo", r.lo}, {"hi", r.hi}});
    j["readout"] = {{"regions", regions}};
    j["output_dir"] = c.output_dir;
    return j;
}

RunConfig from_json(const json& j, RunConfig c) {
    only_keys(j, {"preset", "theory", "seed", "runs", "grid", "hamiltonian", "params", "initial_state",
                  "t0", "t_max", "checkpoints", "dt", "interpolation", "q0", "sample_times",
                  "sigma_zero", "readout", "output_dir"},
              "config");
    take(j, "preset", c.preset);
    if (j.contains("theory")) c.theory = parse_theory(j.at("theory").get<std::string>());
    take(j, "seed", c.seed);
    take(j, "runs", c.runs);
    const std::size_t old_n = c.n_particles;
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        only_keys(g, {"n_particles", "cells_per_axis", "axis_length", "origin"}, "grid");
        take(g, "n_particles", c.n_particles);
        take(g, "cells_per_axis", c.cells_per_axis);
        take(g, "axis_length", c.axis_length);
        take(g, "origin", c.origin);
    }
    if (j.contains("hamiltonian")) {
        const auto& h = j.at("hamiltonian");
        c.hamiltonian = hamiltonian_from_json(h, c.hamiltonian);
        if (h.contains("potential")) {
            c.potential_file.clear();
            potential_from(h.at("potential"), c.potential_file);
        }
    }
    // A particle count changed without per-particle lists: replicate the first entry.
    if (c.n_particles != old_n) {
        auto fit = [&](std::vector<double>& v) {
            if (!v.empty() && v.size() != c.n_particles) v.assign(c.n_particles, v.front());
        };
        fit(c.hamiltonian.masses);
        if (auto* hp = std::get_if<HarmonicPotential>(&c.hamiltonian.potential)) fit(hp->omega);
    }
    if (j.contains("params")) {
        const auto& p = j.at("params");
        only_keys(p, {"lambda_rate", "sigma", "per_label_rates"}, "params");
        take(p, "lambda_rate", c.params.lambda_rate);
        take(p, "sigma", c.params.sigma);
        take(p, "per_label_rates", c.params.per_label_rates);
    }
    if (j.contains("initial_state")) {
        const auto& s = j.at("initial_state");
        only_keys(s, {"kind", "centers", "width", "momentum", "sign", "path"}, "initial_state");
        take(s, "kind", c.initial.kind);
        take(s, "centers", c.initial.centers);
        take(s, "width", c.initial.width);
        take(s, "momentum", c.initial.momentum);
        take(s, "sign", c.initial.sign);
        take(s, "path", c.initial.path);
    }
    take(j, "t0", c.t0);
    take(j, "t_max", c.t_max);
    take(j, "checkpoints", c.checkpoints);
    take(j, "dt", c.dt);
    if (j.contains("interpolation")) {
        const auto m = j.at("interpolation").get<std::string>();
        if (m == "spectral") c.interpolation = Interpolation::spectral;
        else if (m == "multilinear") c.interpolation = Interpolation::multilinear;
        else throw ConfigError("unknown interpolation '" + m + "'");
    }
    if (j.contains("q0")) {
        if (j.at("q0").is_null()) c.q0.reset();
        else c.q0 = j.at("q0").get<std::vector<double>>();
    }
    take(j, "sample_times", c.sample_times);
    take(j, "sigma_zero", c.sigma_zero);
    if (j.contains("readout")) {
        const auto& r = j.at("readout");
        only_keys(r, {"regions"}, "readout");
        if (r.contains("regions")) {
            c.regions.clear();
            for (const auto& e : r.at("regions")) {
                only_keys(e, {"name", "lo", "hi"}, "readout.regions[]");
                c.regions.push_back({e.at("name").get<std::string>(), e.at("lo").get<double>(),
                                     e.at("hi").get<double>()});
            }
        }
    }
    take(j, "output_dir", c.output_dir);
    return c;
}

RunConfig parse_config(const json& j) {
    RunConfig base;
    if (j.contains("preset") && j.at("preset").is_string() && !j.at("preset").get<std::string>().empty())
        base = preset(j.at("preset").get<std::string>());
    return from_json(j, base);
}

namespace {

std::vector<cplx> gaussian_line(const GridSpec& g, double center, double width, double k) {
    std::vector<cplx> v(g.cells());
    for (std::size_t j = 0; j < g.cells(); ++j) {
        const double d = g.periodic_delta(g.position(j), center);
        v[j] = std::polar(std::exp(-d * d / (4.0 * width * width)), k * d);
    }
    return v;
}

std::vector<cplx> product(const GridSpec& g, const std::vector<std::vector<cplx>>& lines) {
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto idx = g.unravel(i);
        cplx f = 1.0;
        for (std::size_t a = 0; a < g.n_particles(); ++a) f *= lines[a][idx[a]];
        out[i] = f;
    }
    return out;
}

}  // namespace

ComplexField make_state(const GridSpec& g, const InitialState& s) {
    const std::size_t n = g.n_particles();
    if (s.kind == "file") {
        auto f = decode_complex_field(read_file(s.path));
        if (!(f.grid() == g)) throw ConfigError("initial state file grid does not match the config grid");
        return f.normalized();
    }
    if (!(s.width > 0.0)) throw ConfigError("initial_state.width must be positive");
    if (s.centers.empty()) throw ConfigError("initial_state.centers must not be empty");
    if (s.kind == "gaussian") {
        std::vector<std::vector<cplx>> lines;
        for (std::size_t a = 0; a < n; ++a)
            lines.push_back(gaussian_line(g, s.centers[a % s.centers.size()], s.width, s.momentum));
        return ComplexField(g, product(g, lines)).normalized();
    }
    if (s.kind == "cat" || s.kind == "symmetric_pair") {
        if (s.centers.size() < 2) throw ConfigError("initial_state '" + s.kind + "' needs two centers");
        const auto a = gaussian_line(g, s.centers[0], s.width, s.momentum);
        const auto b = gaussian_line(g, s.centers[1], s.width, s.momentum);
        std::vector<cplx> first, second;
        if (s.kind == "cat") {
            first = product(g, std::vector<std::vector<cplx>>(n, a));
            second = product(g, std::vector<std::vector<cplx>>(n, b));
        } else {
            if (n != 2) throw ConfigError("symmetric_pair needs exactly two particles");
            first = product(g, {a, b});
            second = product(g, {b, a});
        }
        for (std::size_t i = 0; i < first.size(); ++i) first[i] += s.sign * second[i];
        return ComplexField(g, std::move(first)).normalized();
    }
    throw ConfigError("unknown initial_state kind '" + s.kind + "'");
}

HamiltonianSpec resolved_hamiltonian(const RunConfig& c) {
    HamiltonianSpec h = c.hamiltonian;
    if (auto* tab = std::get_if<TabulatedPotential>(&h.potential); tab && !c.potential_file.empty()) {
        auto [grid, values] = decode_real_field(read_file(c.potential_file));
        if (!(grid == c.grid())) throw ConfigError("tabulated potential grid does not match the config grid");
        tab->values = std::move(values);
    }
    return h;
}

}  // namespace qwo
