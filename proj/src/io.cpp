#include "qwo/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qwo/error.hpp"

namespace qwo {

using nlohmann::json;

namespace {

void put_f64(std::string& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    out.append(b, 8);
}

double get_f64(const std::string& in, std::size_t pos) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
    return std::bit_cast<double>(bits);
}

std::pair<json, std::size_t> split_header(const std::string& bytes) {
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw ConfigError("file has no header line");
    try {
        return {json::parse(bytes.substr(0, nl)), nl + 1};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad header line: ") + e.what());
    }
}

GridSpec grid_from(const json& g) {
    try {
        return GridSpec(g.at("n_particles").get<std::size_t>(), g.at("cells_per_axis").get<std::size_t>(),
                        g.at("axis_length").get<double>(), g.value("origin", 0.0));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad grid header: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad grid header: ") + e.what());
    }
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void expect_format(const json& h, const char* format) {
    if (h.value("format", "") != format)
        throw ConfigError(std::string("expected a '") + format + "' file");
}

}  // namespace

json to_json(const RunRecord& r) {
    return {{"master_seed", r.master_seed},
            {"run_index", r.run_index},
            {"stream_seed", r.stream_seed},
            {"theory", to_string(r.theory)},
            {"params", to_json(r.params)},
            {"grid", to_json(r.grid)},
            {"hamiltonian_digest", r.hamiltonian_digest},
            {"initial_state", r.initial_state},
            {"timestamps", {{"t0", r.t0}, {"t_max", r.t_max}}}};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

std::string encode_complex_field(const ComplexField& f, const json& extra) {
    json h = extra.is_object() ? extra : json::object();
    h["format"] = "qwo.complex_field";
    h["grid"] = to_json(f.grid());
    h["dtype"] = "complex128";
    h["endianness"] = "little";
    h["layout"] = "row-major, axis 0 slowest, interleaved re/im";
    std::string out = h.dump() + "\n";
    out.reserve(out.size() + 16 * f.size());
    for (const auto& v : f.values()) {
        put_f64(out, v.real());
        put_f64(out, v.imag());
    }
    return out;
}

ComplexField decode_complex_field(const std::string& bytes) {
    auto [h, pos] = split_header(bytes);
    expect_format(h, "qwo.complex_field");
    const GridSpec g = grid_from(h.at("grid"));
    if (bytes.size() - pos != 16 * g.size()) throw ConfigError("complex field payload has the wrong length");
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = {get_f64(bytes, pos + 16 * i), get_f64(bytes, pos + 16 * i + 8)};
    try {
        return ComplexField(g, std::move(v));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string encode_real_field(const GridSpec& g, std::span<const double> values, const json& extra) {
    if (values.size() != g.size()) throw std::invalid_argument("real field size does not match grid");
    json h = extra.is_object() ? extra : json::object();
    h["format"] = "qwo.real_field";
    h["grid"] = to_json(g);
    h["dtype"] = "float64";
    h["endianness"] = "little";
    h["layout"] = "row-major, axis 0 slowest";
    std::string out = h.dump() + "\n";
    for (double v : values) put_f64(out, v);
    return out;
}

std::pair<GridSpec, std::vector<double>> decode_real_field(const std::string& bytes) {
    auto [h, pos] = split_header(bytes);
    expect_format(h, "qwo.real_field");
    const GridSpec g = grid_from(h.at("grid"));
    if (bytes.size() - pos != 8 * g.size()) throw ConfigError("real field payload has the wrong length");
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = get_f64(bytes, pos + 8 * i);
        if (!std::isfinite(v[i])) throw ConfigError("real field contains non-finite values");
    }
    return {g, std::move(v)};
}

std::string encode_matter_density(const MatterDensity& m, const json& record) {
    json h{{"format", "qwo.matter_density"},
           {"record", record},
           {"times", m.times},
           {"space", {{"cells", m.cells}, {"axis_length", m.length}, {"origin", m.origin}}},
           {"dtype", "float64"},
           {"endianness", "little"},
           {"layout", "time-major"}};
    std::string out = h.dump() + "\n";
    for (double v : m.values) put_f64(out, v);
    return out;
}

std::pair<json, MatterDensity> decode_matter_density(const std::string& bytes) {
    auto [h, pos] = split_header(bytes);
    expect_format(h, "qwo.matter_density");
    MatterDensity m;
    m.times = h.at("times").get<std::vector<double>>();
    m.cells = h.at("space").at("cells").get<std::size_t>();
    m.length = h.at("space").at("axis_length").get<double>();
    m.origin = h.at("space").at("origin").get<double>();
    const std::size_t count = m.times.size() * m.cells;
    if (bytes.size() - pos != 8 * count) throw ConfigError("matter density payload has the wrong length");
    m.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) m.values[i] = get_f64(bytes, pos + 8 * i);
    return {h.at("record"), std::move(m)};
}

std::string encode_flashes(const FlashHistory& hist, const json& record) {
    json h{{"format", "qwo.flashes"}, {"record", record}, {"count", hist.size()}};
    std::string out = h.dump() + "\n";
    for (const auto& f : hist.flashes())
        out += json{{"t", f.t}, {"x", f.x}, {"label", f.label}}.dump() + "\n";
    return out;
}

std::pair<json, FlashHistory> decode_flashes(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("flash file is empty");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad flash header: ") + e.what());
    }
    expect_format(header, "qwo.flashes");
    FlashHistory hist;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            hist.push({j.at("t").get<double>(), j.at("x").get<double>(), j.at("label").get<int>()});
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad flash line: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad flash history: ") + e.what());
        }
    }
    return {header.at("record"), std::move(hist)};
}

std::string encode_trajectory(const Trajectory& tr, const json& record) {
    json h{{"format", "qwo.trajectory"}, {"record", record}, {"n_particles", tr.n_particles}};
    std::string out = h.dump() + "\n";
    out += "t";
    for (std::size_t a = 0; a < tr.n_particles; ++a) out += ",Q" + std::to_string(a + 1);
    for (std::size_t a = 0; a < tr.n_particles; ++a) out += ",w" + std::to_string(a + 1);
    out += "\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out += g17(tr.times[k]);
        for (std::size_t a = 0; a < tr.n_particles; ++a) out += "," + g17(tr.configs[k][a]);
        for (std::size_t a = 0; a < tr.n_particles; ++a) out += "," + std::to_string(tr.windings[k][a]);
        out += "\n";
    }
    return out;
}

std::pair<json, Trajectory> decode_trajectory(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory file is empty");
    const json header = json::parse(line);
    expect_format(header, "qwo.trajectory");
    Trajectory tr;
    tr.n_particles = header.at("n_particles").get<std::size_t>();
    std::getline(in, line);  // column names
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 1 + 2 * tr.n_particles) throw ConfigError("trajectory row has the wrong width");
        Config q{};
        std::array<long, kMaxParticles> w{};
        for (std::size_t a = 0; a < tr.n_particles; ++a) {
            q[a] = std::stod(cells[1 + a]);
            w[a] = std::stol(cells[1 + tr.n_particles + a]);
        }
        tr.times.push_back(std::stod(cells[0]));
        tr.configs.push_back(q);
        tr.windings.push_back(w);
    }
    return {header.at("record"), std::move(tr)};
}

std::string encode_real_field_csv(const RealField1D& f) {
    std::string out = "position,value\n";
    for (std::size_t j = 0; j < f.cells; ++j) out += g17(f.position(j)) + "," + g17(f.values[j]) + "\n";
    return out;
}

json to_json(const TestReport& r) {
    json j{{"name", r.name},
           {"statistic_name", r.statistic_name},
           {"statistic", r.statistic},
           {"threshold", r.threshold},
           {"verdict", to_string(r.verdict)},
           {"sample_sizes", r.sample_sizes},
           {"seed", r.seed},
           {"note", r.note}};
    j["p_value"] = r.p_value ? json(*r.p_value) : json(nullptr);
    return j;
}

}  // namespace qwo
