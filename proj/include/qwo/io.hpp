#pragma once

// File formats. Every file starts with one JSON header line.
//
//   complex field   header line, then little-endian float64 re/im pairs
//   real field      header line, then little-endian float64 values
//   matter density  header line, then time-major little-endian float64
//   flashes         JSON Lines: header, then {"t","x","label"} per line
//   trajectory      header line, then CSV "t,Q1..QN,w1..wN"
//   real 1D field   CSV "position,value"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include <json.hpp>

#include "qwo/bohm.hpp"
#include "qwo/config.hpp"
#include "qwo/grw.hpp"
#include "qwo/ontology.hpp"
#include "qwo/stats.hpp"

namespace qwo {

struct RunRecord {
    std::uint64_t master_seed = 0;
    std::size_t run_index = 0;
    std::uint64_t stream_seed = 0;
    Theory theory = Theory::grwf;
    TheoryParams params;
    GridSpec grid{1, 2, 1.0};
    std::string hamiltonian_digest;
    nlohmann::json initial_state;
    double t0 = 0.0;
    double t_max = 0.0;
};

nlohmann::json to_json(const RunRecord& r);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string encode_complex_field(const ComplexField& f, const nlohmann::json& extra = {});
ComplexField decode_complex_field(const std::string& bytes);

std::string encode_real_field(const GridSpec& g, std::span<const double> values,
                              const nlohmann::json& extra = {});
std::pair<GridSpec, std::vector<double>> decode_real_field(const std::string& bytes);

std::string encode_matter_density(const MatterDensity& m, const nlohmann::json& record);
std::pair<nlohmann::json, MatterDensity> decode_matter_density(const std::string& bytes);

std::string encode_flashes(const FlashHistory& h, const nlohmann::json& record);
std::pair<nlohmann::json, FlashHistory> decode_flashes(const std::string& text);

std::string encode_trajectory(const Trajectory& tr, const nlohmann::json& record);
std::pair<nlohmann::json, Trajectory> decode_trajectory(const std::string& text);

std::string encode_real_field_csv(const RealField1D& f);

nlohmann::json to_json(const TestReport& r);

}  // namespace qwo
