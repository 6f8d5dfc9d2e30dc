#pragma once

// Run configuration: one JSON document, built-in presets, initial states.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwo/dynamics.hpp"
#include "qwo/grw.hpp"
#include "qwo/ontology.hpp"

namespace qwo {

enum class Theory { bm, grwf, grwf_linear, grwm, sm, sf, sf_prime, grwp, bmw };

const char* to_string(Theory t);
Theory parse_theory(const std::string& s);

// Initial wave function recipe. Gaussians have |psi|^2 standard deviation
// `width` and are laid out with minimal-image distances.
//   gaussian:       prod_i g(q_i; centers[i mod], width, momentum)
//   cat:            prod_i g(q_i; centers[0]) + sign * prod_i g(q_i; centers[1])
//   symmetric_pair: g(q_1; c0) g(q_2; c1) + g(q_1; c1) g(q_2; c0)   (N = 2)
//   file:           ComplexField binary at `path`
struct InitialState {
    std::string kind = "gaussian";
    std::vector<double> centers{0.0};
    double width = 1.0;
    double momentum = 0.0;
    double sign = 1.0;
    std::string path;

    friend bool operator==(const InitialState&, const InitialState&) = default;
};

struct RunConfig {
    std::string preset;
    Theory theory = Theory::grwf;
    std::uint64_t seed = 0;
    std::size_t runs = 1;
    std::size_t n_particles = 1;
    std::size_t cells_per_axis = 128;
    double axis_length = 16.0;
    double origin = -8.0;
    HamiltonianSpec hamiltonian = with_masses({1.0});
    std::string potential_file;  // tabulated potential source, if any
    TheoryParams params;
    InitialState initial;
    double t0 = 0.0;
    double t_max = 1.0;
    std::size_t checkpoints = 20;
    double dt = 0.01;  // Bohmian integration step
    Interpolation interpolation = Interpolation::multilinear;
    std::optional<std::vector<double>> q0;
    std::vector<double> sample_times;
    bool sigma_zero = false;
    std::vector<Region> regions;
    std::string output_dir = "out";

    GridSpec grid() const { return GridSpec(n_particles, cells_per_axis, axis_length, origin); }
    void validate() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

const std::vector<std::string>& preset_names();
// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

nlohmann::json to_json(const RunConfig& c);
// Missing keys keep the values already in `base`. Unknown keys are errors.
RunConfig from_json(const nlohmann::json& j, RunConfig base = {});
// Starts from the preset named in the document (if any), then applies it.
RunConfig parse_config(const nlohmann::json& j);

ComplexField make_state(const GridSpec& grid, const InitialState& s);
// Builds the Hamiltonian, loading a tabulated potential file when named.
HamiltonianSpec resolved_hamiltonian(const RunConfig& c);

// FNV-1a 64 over the canonical JSON of the Hamiltonian, as 16 hex digits.
std::string hamiltonian_digest(const HamiltonianSpec& h);

nlohmann::json to_json(const HamiltonianSpec& h);
HamiltonianSpec hamiltonian_from_json(const nlohmann::json& j, HamiltonianSpec base);
nlohmann::json to_json(const TheoryParams& p);
nlohmann::json to_json(const GridSpec& g);

}  // namespace qwo
