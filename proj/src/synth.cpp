#include "srmcal/synth.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srmcal/touchstone.hpp"
#include "srmcal/version.hpp"

namespace srmcal {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {
constexpr double pi = 3.14159265358979323846;
constexpr double c0_m_per_s = 299792458.0;
constexpr double np_per_db = 0.11512925464970229; // ln(10)/20
} // namespace

// ----------------------------------------------------------------------
// RNG
// ----------------------------------------------------------------------

std::uint64_t rng::mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (0x9E3779B97F4A7C15ull * (b + 0x632BE59BD9B4E019ull));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double rng::gaussian() {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

complex rng::complex_gaussian(double sigma) {
    const double s = sigma / std::sqrt(2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
}

// ----------------------------------------------------------------------
// Transmission line
// ----------------------------------------------------------------------

complex propagation_constant(const line_model& line, double f_hz) {
    const double f_ghz = f_hz / 1e9;
    const double alpha =
        np_per_db * (line.loss_db_per_m_at_1ghz * std::sqrt(std::max(f_ghz, 0.0)) +
                     line.dielectric_loss_db_per_m_at_1ghz * f_ghz);
    const double beta = 2.0 * pi * f_hz * std::sqrt(line.eps_eff) / c0_m_per_s;
    return {alpha, beta};
}

sparams line_sparams(const line_model& line, double f_hz, complex z_ref) {
    const complex gl = propagation_constant(line, f_hz) * line.length_m;
    const complex e = std::exp(-gl);
    const complex step = (line.z0 - z_ref) / (line.z0 + z_ref);
    const complex e2 = e * e;
    const complex den = 1.0 - step * step * e2;
    sparams s;
    s.s11 = s.s22 = step * (1.0 - e2) / den;
    s.s21 = s.s12 = (1.0 - step * step) * e / den;
    return s;
}

matrix2 line_t(const line_model& line, double f_hz, complex z_ref) {
    return s_to_t(line_sparams(line, f_hz, z_ref));
}

frequency_network line_network(const line_model& line,
                               const std::vector<double>& freqs_hz,
                               complex z_ref, std::string label) {
    std::vector<sparams> data;
    data.reserve(freqs_hz.size());
    for (double f : freqs_hz) data.push_back(line_sparams(line, f, z_ref));
    return make_two_port(freqs_hz, std::move(data), z_ref, std::move(label));
}

// ----------------------------------------------------------------------
// Lumped loads
// ----------------------------------------------------------------------

namespace {

complex element_gamma(const lumped_load& m, double f_hz, complex z_ref) {
    const double w = 2.0 * pi * f_hz;
    const complex jwl{0.0, w * m.l0_h};
    const complex jwc{0.0, w * m.c0_f};

    if (m.topology == load_topology::series_l_shunt_rc) {
        // Z = jwL + (R || 1/(jwC))
        complex z_shunt;
        if (m.r_ohm == 0.0) {
            z_shunt = 0.0;
        } else {
            complex y = jwc;
            if (std::isfinite(m.r_ohm)) y += 1.0 / m.r_ohm;
            if (std::abs(y) == 0.0) return {1.0, 0.0}; // ideal open
            z_shunt = 1.0 / y;
        }
        const complex z = jwl + z_shunt;
        return (z - z_ref) / (z + z_ref);
    }

    // shunt_c_series_rl: Y = jwC + 1/(R + jwL)
    complex y = jwc;
    if (std::isfinite(m.r_ohm)) {
        const complex z_inner = m.r_ohm + jwl;
        if (std::abs(z_inner) == 0.0) return {-1.0, 0.0}; // ideal short
        y += 1.0 / z_inner;
    }
    if (std::abs(y) == 0.0) return {1.0, 0.0};
    const complex z = 1.0 / y;
    return (z - z_ref) / (z + z_ref);
}

} // namespace

complex load_gamma(const lumped_load& model, double f_hz, complex z_ref) {
    if (f_hz <= 0.0) {
        throw config_error("load_gamma: frequency must be positive");
    }
    complex g = element_gamma(model, f_hz, z_ref);
    if (model.offset && model.offset->length_m > 0.0) {
        g = input_reflection(line_t(*model.offset, f_hz, z_ref), g);
    }
    return g;
}

// ----------------------------------------------------------------------
// Embedding
// ----------------------------------------------------------------------

sparams embed_two_port(const error_terms& t, const sparams& s_true,
                       double floor) {
    const matrix2 m =
        t.k * (t.a_matrix() * s_to_t(s_true, floor) * t.b_matrix());
    return t_to_s(m, floor);
}

complex embed_left(const error_terms& t, const complex& rho) {
    return input_reflection(t.a_matrix(), rho);
}

complex embed_right(const error_terms& t, const complex& rho) {
    return output_reflection(t.b_matrix(), rho);
}

complex embed_left_through(const error_terms& t, const matrix2& net_t,
                           const complex& rho) {
    return input_reflection(t.a_matrix() * net_t, rho);
}

complex embed_right_through(const error_terms& t, const matrix2& net_t,
                            const complex& rho) {
    return output_reflection(net_t * t.b_matrix(), rho);
}

// ----------------------------------------------------------------------
// Sources
// ----------------------------------------------------------------------

source_mask source_from_name(const std::string& name) {
    if (name == "noise") return source_noise;
    if (name == "asymmetry") return source_asymmetry;
    if (name == "network") return source_network;
    if (name == "match") return source_match;
    if (name == "crosstalk") return source_crosstalk;
    if (name == "all") return all_sources;
    if (name == "none") return no_sources;
    throw config_error("unknown uncertainty source '" + name + "'");
}

const char* source_name(source_bit bit) {
    switch (bit) {
    case source_noise: return "noise";
    case source_asymmetry: return "asymmetry";
    case source_network: return "network";
    case source_match: return "match";
    case source_crosstalk: return "crosstalk";
    }
    return "?";
}

// ----------------------------------------------------------------------
// Kit configuration
// ----------------------------------------------------------------------

kit_config default_kit() {
    kit_config kit;
    kit.frequencies_hz = linspace(1e9, 150e9, 20);
    kit.z_ref = {50.0, 0.0};
    kit.mode = srm_mode::full_network;
    kit.side = network_load_side::left;

    line_model offset;
    offset.length_m = 200e-6;
    offset.z0 = {50.0, 0.0};
    offset.eps_eff = 5.45;
    offset.loss_db_per_m_at_1ghz = 30.0;

    lumped_load short_std;
    short_std.r_ohm = 0.0;
    short_std.l0_h = 10e-12;
    short_std.c0_f = 0.5e-15;
    short_std.offset = offset;

    lumped_load open_std;
    open_std.r_ohm = std::numeric_limits<double>::infinity();
    open_std.l0_h = 0.5e-12;
    open_std.c0_f = 10e-15;
    open_std.offset = offset;

    lumped_load match_std;
    match_std.r_ohm = 50.0;
    match_std.l0_h = 5e-12;
    match_std.c0_f = 0.5e-15;
    match_std.offset = offset;

    kit.loads = {{"short", short_std}, {"open", open_std}, {"match", match_std}};
    kit.match_model = match_std;
    kit.designated_load = 0;
    kit.designated_gamma = {-1.0, 0.0};

    kit.network.length_m = 4e-3;
    kit.network.z0 = {50.0, 0.0};
    kit.network.eps_eff = 5.45;
    kit.network.loss_db_per_m_at_1ghz = 30.0;

    kit.dut.length_m = 3e-3;
    kit.dut.z0 = {78.0, 0.0};
    kit.dut.eps_eff = 5.45;
    kit.dut.loss_db_per_m_at_1ghz = 45.0;
    return kit;
}

namespace {

complex json_complex(const json& j, const std::string& field) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw config_error("field '" + field + "': expected number or [re, im]");
}

double json_resistance(const json& j, const std::string& field) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        throw config_error("field '" + field + "': expected number or \"inf\"");
    }
    if (!j.is_number()) {
        throw config_error("field '" + field + "': expected number or \"inf\"");
    }
    const double r = j.get<double>();
    if (r < 0.0) {
        throw config_error("field '" + field + "': resistance must be >= 0");
    }
    return r;
}

line_model line_from_json(const json& j, const std::string& field) {
    if (!j.is_object()) {
        throw config_error("field '" + field + "': expected a line object");
    }
    line_model line;
    line.length_m = j.at("length_m").get<double>();
    if (line.length_m < 0.0) {
        throw config_error("field '" + field + ".length_m': must be >= 0");
    }
    line.z0 = json_complex(j.at("z0_ohm"), field + ".z0_ohm");
    line.eps_eff = j.value("eps_eff", 1.0);
    if (line.eps_eff <= 0.0) {
        throw config_error("field '" + field + ".eps_eff': must be > 0");
    }
    line.loss_db_per_m_at_1ghz = j.value("loss_db_per_m_at_1ghz", 0.0);
    line.dielectric_loss_db_per_m_at_1ghz =
        j.value("dielectric_loss_db_per_m_at_1ghz", 0.0);
    if (line.loss_db_per_m_at_1ghz < 0.0 ||
        line.dielectric_loss_db_per_m_at_1ghz < 0.0) {
        throw config_error("field '" + field + "': loss must be >= 0");
    }
    return line;
}

json line_to_json(const line_model& line) {
    json j;
    j["length_m"] = line.length_m;
    j["z0_ohm"] = {line.z0.real(), line.z0.imag()};
    j["eps_eff"] = line.eps_eff;
    j["loss_db_per_m_at_1ghz"] = line.loss_db_per_m_at_1ghz;
    j["dielectric_loss_db_per_m_at_1ghz"] = line.dielectric_loss_db_per_m_at_1ghz;
    return j;
}

lumped_load load_from_json(const json& j, const std::string& field) {
    lumped_load m;
    const std::string topo = j.value("topology", "series-l-shunt-rc");
    if (topo == "series-l-shunt-rc") {
        m.topology = load_topology::series_l_shunt_rc;
    } else if (topo == "shunt-c-series-rl") {
        m.topology = load_topology::shunt_c_series_rl;
    } else {
        throw config_error("field '" + field + ".topology': unknown topology '" +
                           topo + "'");
    }
    m.r_ohm = j.contains("r_ohm")
                  ? json_resistance(j.at("r_ohm"), field + ".r_ohm")
                  : std::numeric_limits<double>::infinity();
    m.l0_h = j.value("l0_h", 0.0);
    m.c0_f = j.value("c0_f", 0.0);
    if (!std::isfinite(m.l0_h) || !std::isfinite(m.c0_f)) {
        throw config_error("field '" + field + "': L0/C0 must be finite");
    }
    if (j.contains("offset")) {
        m.offset = line_from_json(j.at("offset"), field + ".offset");
    }
    return m;
}

json load_to_json(const lumped_load& m) {
    json j;
    j["topology"] = m.topology == load_topology::series_l_shunt_rc
                        ? "series-l-shunt-rc"
                        : "shunt-c-series-rl";
    if (std::isfinite(m.r_ohm)) j["r_ohm"] = m.r_ohm;
    else j["r_ohm"] = "inf";
    j["l0_h"] = m.l0_h;
    j["c0_f"] = m.c0_f;
    if (m.offset) j["offset"] = line_to_json(*m.offset);
    return j;
}

} // namespace

kit_config kit_config_from_json_string(const std::string& text,
                                       const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(origin + ": " + e.what());
    }
    try {
        kit_config kit = default_kit();

        if (j.contains("frequencies_hz")) {
            kit.frequencies_hz = j.at("frequencies_hz").get<std::vector<double>>();
        } else if (j.contains("frequency")) {
            const json& f = j.at("frequency");
            kit.frequencies_hz =
                linspace(f.at("start_hz").get<double>(),
                         f.at("stop_hz").get<double>(),
                         f.at("points").get<std::size_t>());
        }
        if (kit.frequencies_hz.empty() || kit.frequencies_hz.front() <= 0.0) {
            throw config_error("field 'frequency': needs positive frequencies");
        }
        for (std::size_t i = 1; i < kit.frequencies_hz.size(); ++i) {
            if (kit.frequencies_hz[i] <= kit.frequencies_hz[i - 1]) {
                throw config_error("field 'frequency': not strictly increasing");
            }
        }

        if (j.contains("reference_impedance_ohm")) {
            kit.z_ref = json_complex(j.at("reference_impedance_ohm"),
                                     "reference_impedance_ohm");
        }
        if (j.contains("mode")) {
            kit.mode = srm_mode_from_string(j.at("mode").get<std::string>());
        }
        if (j.contains("network_load_side")) {
            kit.side =
                side_from_string(j.at("network_load_side").get<std::string>());
        }

        if (j.contains("loads")) {
            kit.loads.clear();
            std::size_t idx = 0;
            for (const json& lj : j.at("loads")) {
                named_load nl;
                nl.name = lj.value("name", "load_" + std::to_string(idx));
                nl.model = load_from_json(lj, "loads[" + std::to_string(idx) + "]");
                kit.loads.push_back(std::move(nl));
                ++idx;
            }
        }
        if (kit.loads.size() < 3) {
            throw config_error("field 'loads': need at least 3 load standards");
        }

        auto find_load = [&](const std::string& name) -> std::size_t {
            for (std::size_t i = 0; i < kit.loads.size(); ++i) {
                if (kit.loads[i].name == name) return i;
            }
            throw config_error("no load standard named '" + name + "'");
        };

        if (j.contains("match")) {
            const json& mj = j.at("match");
            if (mj.contains("same_as_load")) {
                kit.match_model =
                    kit.loads[find_load(mj.at("same_as_load").get<std::string>())]
                        .model;
            } else {
                kit.match_model = load_from_json(mj, "match");
            }
        } else {
            // Default: reuse the load named "match" if present.
            for (const named_load& nl : kit.loads) {
                if (nl.name == "match") kit.match_model = nl.model;
            }
        }

        if (j.contains("network")) {
            kit.network = line_from_json(j.at("network"), "network");
        }
        if (j.contains("dut")) {
            kit.dut = line_from_json(j.at("dut"), "dut");
        }

        if (j.contains("estimate")) {
            const json& ej = j.at("estimate");
            if (ej.contains("load")) {
                if (ej.at("load").is_string()) {
                    kit.designated_load = find_load(ej.at("load").get<std::string>());
                } else {
                    kit.designated_load = ej.at("load").get<std::size_t>();
                }
            }
            if (ej.contains("gamma")) {
                kit.designated_gamma = json_complex(ej.at("gamma"), "estimate.gamma");
            }
        }
        if (kit.designated_load >= kit.loads.size()) {
            throw config_error("field 'estimate.load': index out of range");
        }

        if (j.contains("perturbation")) {
            const json& pj = j.at("perturbation");
            perturbation_spec& p = kit.perturbation;
            p.noise_sigma = pj.value("noise_sigma", p.noise_sigma);
            p.element_variation = pj.value("element_variation", p.element_variation);
            p.length_sigma_m = pj.value("length_sigma_m", p.length_sigma_m);
            p.line_param_variation =
                pj.value("line_param_variation", p.line_param_variation);
            p.crosstalk_c_sigma_f =
                pj.value("crosstalk_c_sigma_f", p.crosstalk_c_sigma_f);
            p.seed = pj.value("seed", p.seed);
            if (p.noise_sigma < 0.0 || p.element_variation < 0.0 ||
                p.length_sigma_m < 0.0 || p.line_param_variation < 0.0 ||
                p.crosstalk_c_sigma_f < 0.0) {
                throw config_error("field 'perturbation': sigmas must be >= 0");
            }
        }

        if (j.contains("error_model")) {
            const json& ej = j.at("error_model");
            if (ej.contains("file")) {
                kit.error_model_path = ej.at("file").get<std::string>();
            } else if (ej.value("builtin", "") != "smooth" && !ej.is_null()) {
                throw config_error(
                    "field 'error_model': expected {\"file\": path} or "
                    "{\"builtin\": \"smooth\"}");
            }
        }
        return kit;
    } catch (const json::exception& e) {
        throw config_error(origin + ": " + e.what());
    }
}

kit_config load_kit_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open kit config '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return kit_config_from_json_string(buf.str(), path);
}

std::string kit_config_to_json_string(const kit_config& kit) {
    json j;
    j["frequencies_hz"] = kit.frequencies_hz;
    j["reference_impedance_ohm"] = {kit.z_ref.real(), kit.z_ref.imag()};
    j["mode"] = to_string(kit.mode);
    j["network_load_side"] = to_string(kit.side);
    j["loads"] = json::array();
    for (const named_load& nl : kit.loads) {
        json lj = load_to_json(nl.model);
        lj["name"] = nl.name;
        j["loads"].push_back(lj);
    }
    j["match"] = load_to_json(kit.match_model);
    j["network"] = line_to_json(kit.network);
    j["dut"] = line_to_json(kit.dut);
    j["estimate"] = {{"load", kit.designated_load},
                     {"gamma", {kit.designated_gamma.real(),
                                kit.designated_gamma.imag()}}};
    j["perturbation"] = {
        {"noise_sigma", kit.perturbation.noise_sigma},
        {"element_variation", kit.perturbation.element_variation},
        {"length_sigma_m", kit.perturbation.length_sigma_m},
        {"line_param_variation", kit.perturbation.line_param_variation},
        {"crosstalk_c_sigma_f", kit.perturbation.crosstalk_c_sigma_f},
        {"seed", kit.perturbation.seed}};
    if (!kit.error_model_path.empty()) {
        j["error_model"] = {{"file", kit.error_model_path}};
    } else {
        j["error_model"] = {{"builtin", "smooth"}};
    }
    return j.dump(2);
}

// ----------------------------------------------------------------------
// Error boxes for simulation
// ----------------------------------------------------------------------

error_model fixture_error_model(const std::vector<double>& freqs_hz) {
    error_model model;
    model.frequencies_hz = freqs_hz;
    model.terms.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        const double fg = f / 1e9;
        error_terms t;
        t.a11 = std::polar(0.92 + 0.05 * std::cos(2.0 * pi * fg / 37.0),
                           -2.0 * pi * f * 12e-12);
        t.a12 = std::polar(0.18 + 0.03 * std::sin(2.0 * pi * fg / 23.0),
                           -2.0 * pi * f * 9e-12 + 0.4);
        t.a21 = std::polar(0.14 + 0.04 * std::cos(2.0 * pi * fg / 29.0 + 1.0),
                           -2.0 * pi * f * 15e-12 - 0.7);
        t.b11 = std::polar(0.88 + 0.06 * std::cos(2.0 * pi * fg / 31.0 + 0.5),
                           -2.0 * pi * f * 10e-12 + 0.2);
        t.b12 = std::polar(0.16 + 0.03 * std::sin(2.0 * pi * fg / 19.0 + 0.3),
                           -2.0 * pi * f * 13e-12 + 1.1);
        t.b21 = std::polar(0.11 + 0.05 * std::cos(2.0 * pi * fg / 41.0 + 2.0),
                           -2.0 * pi * f * 8e-12 - 0.3);
        t.k = std::polar(0.85 + 0.10 * std::cos(2.0 * pi * fg / 53.0),
                         -2.0 * pi * f * 20e-12);
        model.terms.push_back(t);
    }
    validate(model);
    return model;
}

error_model random_error_model(const std::vector<double>& freqs_hz,
                               std::uint64_t seed) {
    rng r = rng::for_stream(seed, 0xE0B0);
    // Smooth over frequency: random magnitudes, phase offsets and delays,
    // evaluated as continuous curves. Real error boxes are smooth; the
    // eigen-order bookkeeping relies on that.
    struct curve {
        double mag, phase0, delay;
        complex at(double f) const {
            return std::polar(mag, phase0 - 2.0 * pi * f * delay);
        }
    };
    auto draw = [&](double mag_lo, double mag_hi) {
        curve c;
        c.mag = mag_lo + (mag_hi - mag_lo) * r.uniform();
        c.phase0 = 2.0 * pi * r.uniform();
        c.delay = 30e-12 * r.uniform();
        return c;
    };
    const curve a11 = draw(0.7, 1.2), a12 = draw(0.05, 0.3), a21 = draw(0.05, 0.3);
    const curve b11 = draw(0.7, 1.2), b12 = draw(0.05, 0.3), b21 = draw(0.05, 0.3);
    const curve kk = draw(0.5, 1.5);

    error_model model;
    model.frequencies_hz = freqs_hz;
    model.terms.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        error_terms t;
        t.a11 = a11.at(f);
        t.a12 = a12.at(f);
        t.a21 = a21.at(f);
        t.b11 = b11.at(f);
        t.b12 = b12.at(f);
        t.b21 = b21.at(f);
        t.k = kk.at(f);
        model.terms.push_back(t);
    }
    validate(model);
    return model;
}

// ----------------------------------------------------------------------
// Synthetic measurement set
// ----------------------------------------------------------------------

namespace {

lumped_load perturb_load(const lumped_load& nominal, rng& r, double elem_sigma,
                         double line_sigma) {
    lumped_load out = nominal;
    out.r_ohm = nominal.r_ohm * (1.0 + elem_sigma * r.gaussian());
    out.l0_h = nominal.l0_h * (1.0 + elem_sigma * r.gaussian());
    out.c0_f = nominal.c0_f * (1.0 + elem_sigma * r.gaussian());
    if (out.r_ohm < 0.0) out.r_ohm = 0.0;
    if (out.offset) {
        line_model& l = *out.offset;
        l.z0 *= (1.0 + line_sigma * r.gaussian());
        l.eps_eff *= (1.0 + line_sigma * r.gaussian());
        l.loss_db_per_m_at_1ghz *= (1.0 + line_sigma * r.gaussian());
        if (l.eps_eff <= 0.0) l.eps_eff = nominal.offset->eps_eff;
        if (l.loss_db_per_m_at_1ghz < 0.0) l.loss_db_per_m_at_1ghz = 0.0;
    }
    return out;
}

line_model perturb_line(const line_model& nominal, rng& r, double line_sigma,
                        double length_sigma) {
    line_model out = nominal;
    out.z0 *= (1.0 + line_sigma * r.gaussian());
    out.eps_eff *= (1.0 + line_sigma * r.gaussian());
    out.loss_db_per_m_at_1ghz *= (1.0 + line_sigma * r.gaussian());
    out.length_m += length_sigma * r.gaussian();
    if (out.eps_eff <= 0.0) out.eps_eff = nominal.eps_eff;
    if (out.loss_db_per_m_at_1ghz < 0.0) out.loss_db_per_m_at_1ghz = 0.0;
    if (out.length_m < 0.0) out.length_m = 0.0;
    return out;
}

// Coupled pair of one-port loads: bridging capacitor between the two
// reference planes, expressed through normalized admittances.
sparams coupled_loads(const complex& gamma_left, const complex& gamma_right,
                      double c_x, double f_hz, complex z_ref) {
    const complex one{1.0, 0.0};
    const complex y1 = (one - gamma_left) / (one + gamma_left);
    const complex y2 = (one - gamma_right) / (one + gamma_right);
    const complex yx = complex{0.0, 2.0 * pi * f_hz * c_x} * z_ref;
    // S = (I - Y)(I + Y)^-1 with Y = [[y1+yx, -yx], [-yx, y2+yx]]
    const matrix2 y{y1 + yx, -yx, -yx, y2 + yx};
    const matrix2 ipy{one + y.e11, y.e12, y.e21, one + y.e22};
    const matrix2 imy{one - y.e11, -y.e12, -y.e21, one - y.e22};
    const matrix2 s = imy * inverse(ipy);
    return {s.e11, s.e12, s.e21, s.e22};
}

void add_noise(sparams& s, rng& r, double sigma) {
    s.s11 += r.complex_gaussian(sigma);
    s.s21 += r.complex_gaussian(sigma);
    s.s12 += r.complex_gaussian(sigma);
    s.s22 += r.complex_gaussian(sigma);
}

} // namespace

synthetic_set make_srm_set(const kit_config& kit, const error_model& boxes,
                           const perturbation_spec& pert, source_mask enabled) {
    if (kit.loads.size() < 3) {
        throw config_error("make_srm_set: kit needs at least 3 loads");
    }
    if (!grids_match(kit.frequencies_hz, boxes.frequencies_hz)) {
        throw grid_mismatch("make_srm_set: error model grid does not match kit");
    }
    validate(boxes);

    const std::size_t n_freq = kit.frequencies_hz.size();
    const std::size_t n_loads = kit.loads.size();
    const complex z_ref = kit.z_ref;
    const std::uint64_t seed = pert.seed;

    const double elem_sigma = (enabled & source_asymmetry) ? pert.element_variation : 0.0;
    const double load_line_sigma =
        (enabled & source_asymmetry) ? pert.line_param_variation : 0.0;
    const double net_line_sigma =
        (enabled & source_network) ? pert.line_param_variation : 0.0;
    const double net_length_sigma =
        (enabled & source_network) ? pert.length_sigma_m : 0.0;
    const double match_sigma = (enabled & source_match) ? pert.element_variation : 0.0;
    const double match_line_sigma =
        (enabled & source_match) ? pert.line_param_variation : 0.0;
    const double noise_sigma = (enabled & source_noise) ? pert.noise_sigma : 0.0;
    const double cx_sigma = (enabled & source_crosstalk) ? pert.crosstalk_c_sigma_f : 0.0;

    // Realized standards (independent draw stream per physical structure).
    std::vector<lumped_load> left_loads, right_loads, netload_loads;
    std::vector<double> cx(n_loads, 0.0);
    for (std::size_t i = 0; i < n_loads; ++i) {
        rng rl = rng::for_stream(seed, streams::load_left + i);
        rng rr = rng::for_stream(seed, streams::load_right + i);
        rng rn = rng::for_stream(seed, streams::netload_load + i);
        left_loads.push_back(perturb_load(kit.loads[i].model, rl, elem_sigma,
                                          load_line_sigma));
        right_loads.push_back(perturb_load(kit.loads[i].model, rr, elem_sigma,
                                           load_line_sigma));
        netload_loads.push_back(perturb_load(kit.loads[i].model, rn, elem_sigma,
                                             load_line_sigma));
        rng rx = rng::for_stream(seed, streams::crosstalk + i);
        cx[i] = cx_sigma * rx.gaussian();
    }

    rng rml = rng::for_stream(seed, streams::match_left);
    rng rmr = rng::for_stream(seed, streams::match_right);
    const lumped_load match_left_real =
        perturb_load(kit.match_model, rml, match_sigma, match_line_sigma);
    const lumped_load match_right_real =
        perturb_load(kit.match_model, rmr, match_sigma, match_line_sigma);

    const bool thru_mode = kit.mode == srm_mode::thru;
    line_model netload_nominal = kit.network;
    if (kit.mode == srm_mode::half_network) netload_nominal.length_m /= 2.0;

    line_model network_real = kit.network;
    std::vector<line_model> netload_lines;
    if (!thru_mode) {
        rng rnet = rng::for_stream(seed, streams::network_line);
        network_real = perturb_line(kit.network, rnet, net_line_sigma,
                                    net_length_sigma);
        for (std::size_t i = 0; i < n_loads; ++i) {
            rng rline = rng::for_stream(seed, streams::netload_line + i);
            netload_lines.push_back(perturb_line(netload_nominal, rline,
                                                 net_line_sigma,
                                                 net_length_sigma));
        }
    }

    // Noise streams, one per output file, fixed order.
    std::vector<rng> noise_streams;
    const std::size_t file_count = n_loads /*loads*/ + 1 /*network*/ +
                                   n_loads /*network loads*/ + 2 /*match*/ +
                                   1 /*dut*/;
    noise_streams.reserve(file_count);
    for (std::size_t i = 0; i < file_count; ++i) {
        noise_streams.push_back(rng::for_stream(seed, streams::noise + i));
    }
    std::size_t file_idx = 0;

    synthetic_set out;
    out.meas.side = kit.side;
    out.nominal_load_gamma.assign(n_loads, std::vector<complex>(n_freq));
    out.nominal_match_gamma.resize(n_freq);

    // Load standards.
    for (std::size_t i = 0; i < n_loads; ++i) {
        rng& nz = noise_streams[file_idx++];
        std::vector<sparams> data(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const double f = kit.frequencies_hz[fi];
            const complex rho_l = load_gamma(left_loads[i], f, z_ref);
            const complex rho_r = load_gamma(right_loads[i], f, z_ref);
            out.nominal_load_gamma[i][fi] =
                load_gamma(kit.loads[i].model, f, z_ref);

            sparams raw;
            const bool coupled =
                std::abs(cx[i]) > 1e-24 &&
                std::abs(1.0 + rho_l) > 1e-9 && std::abs(1.0 + rho_r) > 1e-9;
            if (coupled) {
                const sparams s_true = coupled_loads(rho_l, rho_r, cx[i], f, z_ref);
                raw = embed_two_port(boxes.terms[fi], s_true);
            } else {
                raw.s11 = embed_left(boxes.terms[fi], rho_l);
                raw.s22 = embed_right(boxes.terms[fi], rho_r);
            }
            add_noise(raw, nz, noise_sigma);
            data[fi] = raw;
        }
        out.meas.loads.push_back(make_two_port(kit.frequencies_hz, std::move(data),
                                               z_ref, "load_" + std::to_string(i)));
    }

    // Network standard.
    {
        rng& nz = noise_streams[file_idx++];
        std::vector<sparams> data(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const double f = kit.frequencies_hz[fi];
            const sparams s_true = thru_mode
                                       ? sparams::thru()
                                       : line_sparams(network_real, f, z_ref);
            sparams raw = embed_two_port(boxes.terms[fi], s_true);
            add_noise(raw, nz, noise_sigma);
            data[fi] = raw;
        }
        out.meas.network = make_two_port(kit.frequencies_hz, std::move(data),
                                         z_ref, "network");
    }

    // Network-load standards. In thru mode the "network" in front of the
    // load is the defined thru itself, which keeps the set usable in every
    // mode.
    for (std::size_t i = 0; i < n_loads; ++i) {
        rng& nz = noise_streams[file_idx++];
        std::vector<complex> gam(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const double f = kit.frequencies_hz[fi];
            const complex rho = load_gamma(netload_loads[i], f, z_ref);
            const matrix2 net_t = thru_mode
                                      ? matrix2::identity()
                                      : line_t(netload_lines[i], f, z_ref);
            complex g = kit.side == network_load_side::left
                            ? embed_left_through(boxes.terms[fi], net_t, rho)
                            : embed_right_through(boxes.terms[fi], net_t, rho);
            g += nz.complex_gaussian(noise_sigma);
            gam[fi] = g;
        }
        out.meas.network_loads.push_back(
            make_one_port(kit.frequencies_hz, std::move(gam), z_ref,
                          "network_load_" + std::to_string(i)));
    }

    // Match standard sweeps and the nominal definition.
    {
        rng& nzl = noise_streams[file_idx++];
        rng& nzr = noise_streams[file_idx++];
        std::vector<complex> gl(n_freq), gr(n_freq);
        std::vector<complex> def(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const double f = kit.frequencies_hz[fi];
            gl[fi] = embed_left(boxes.terms[fi],
                                load_gamma(match_left_real, f, z_ref)) +
                     nzl.complex_gaussian(noise_sigma);
            gr[fi] = embed_right(boxes.terms[fi],
                                 load_gamma(match_right_real, f, z_ref)) +
                     nzr.complex_gaussian(noise_sigma);
            def[fi] = load_gamma(kit.match_model, f, z_ref);
        }
        out.meas.match_left =
            make_one_port(kit.frequencies_hz, std::move(gl), z_ref, "match_left");
        out.meas.match_right =
            make_one_port(kit.frequencies_hz, std::move(gr), z_ref, "match_right");
        out.meas.match_def = match_definition::from_gammas(def, def);
        out.nominal_match_gamma = def;
    }

    // Bundled verification DUT.
    {
        rng& nz = noise_streams[file_idx++];
        std::vector<sparams> raw(n_freq), ref(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const double f = kit.frequencies_hz[fi];
            const sparams s_true = line_sparams(kit.dut, f, z_ref);
            ref[fi] = s_true;
            sparams r = embed_two_port(boxes.terms[fi], s_true);
            add_noise(r, nz, noise_sigma);
            raw[fi] = r;
        }
        out.dut_raw = make_two_port(kit.frequencies_hz, std::move(raw), z_ref, "dut");
        out.dut_reference = make_two_port(kit.frequencies_hz, std::move(ref), z_ref,
                                          "dut_reference");
    }

    out.meas.estimate.load_index = kit.designated_load;
    out.meas.estimate.load_gamma = kit.designated_gamma;
    // A wideband anchor: offset standards rotate far from the lumped value,
    // so the estimate follows the nominal model across the sweep.
    out.meas.estimate.load_gamma_sweep =
        out.nominal_load_gamma[kit.designated_load];
    out.meas.estimate.network_delay_s =
        thru_mode ? 0.0
                  : kit.network.length_m * std::sqrt(kit.network.eps_eff) /
                        c0_m_per_s;
    return out;
}

// ----------------------------------------------------------------------
// Directory I/O
// ----------------------------------------------------------------------

namespace {

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace

std::vector<std::string> write_measurement_dir(const synthetic_set& set,
                                               const kit_config& kit,
                                               const std::string& dir,
                                               const std::string& config_origin) {
    fs::create_directories(dir);
    const fs::path base(dir);
    std::vector<std::string> written;
    auto emit2 = [&](const frequency_network& net, const std::string& name) {
        write_touchstone(net, (base / name).string());
        written.push_back(name);
    };

    json roles;
    roles["loads"] = json::array();
    for (std::size_t i = 0; i < set.meas.loads.size(); ++i) {
        const std::string name = "load_" + std::to_string(i) + ".s2p";
        emit2(set.meas.loads[i], name);
        roles["loads"].push_back(name);
    }
    emit2(set.meas.network, "network.s2p");
    roles["network"] = "network.s2p";
    roles["network_loads"] = json::array();
    for (std::size_t i = 0; i < set.meas.network_loads.size(); ++i) {
        const std::string name = "network_load_" + std::to_string(i) + ".s1p";
        emit2(set.meas.network_loads[i], name);
        roles["network_loads"].push_back(name);
    }
    emit2(set.meas.match_left, "match_left.s1p");
    emit2(set.meas.match_right, "match_right.s1p");
    roles["match_left"] = "match_left.s1p";
    roles["match_right"] = "match_right.s1p";

    emit2(make_one_port(set.meas.network.frequencies_hz,
                        set.meas.match_def.gamma_left, kit.z_ref,
                        "match_def_left"),
          "match_def_left.s1p");
    emit2(make_one_port(set.meas.network.frequencies_hz,
                        set.meas.match_def.gamma_right, kit.z_ref,
                        "match_def_right"),
          "match_def_right.s1p");
    roles["match_def_left"] = "match_def_left.s1p";
    roles["match_def_right"] = "match_def_right.s1p";

    emit2(set.dut_raw, "dut.s2p");
    emit2(set.dut_reference, "dut_reference.s2p");
    roles["dut"] = "dut.s2p";
    roles["dut_reference"] = "dut_reference.s2p";

    json manifest;
    manifest["format"] = "srmcal-manifest";
    manifest["version"] = 1;
    manifest["command"] = "simulate";
    manifest["tool_version"] = SRMCAL_VERSION;
    manifest["timestamp"] = iso_timestamp();
    manifest["config_origin"] = config_origin;
    manifest["seed"] = kit.perturbation.seed;
    manifest["mode"] = to_string(kit.mode);
    manifest["network_load_side"] = to_string(kit.side);
    manifest["reference_impedance_ohm"] = {kit.z_ref.real(), kit.z_ref.imag()};
    manifest["roles"] = roles;
    manifest["estimate"] = {
        {"load_index", set.meas.estimate.load_index},
        {"load_gamma",
         {set.meas.estimate.load_gamma.real(), set.meas.estimate.load_gamma.imag()}},
        {"network_delay_s", set.meas.estimate.network_delay_s}};
    if (!set.meas.estimate.load_gamma_sweep.empty()) {
        json sweep = json::array();
        for (const complex& g : set.meas.estimate.load_gamma_sweep) {
            sweep.push_back({g.real(), g.imag()});
        }
        manifest["estimate"]["load_gamma_sweep"] = sweep;
    }

    std::ofstream mo(base / "manifest.json");
    if (!mo) {
        throw data_error("cannot write manifest in '" + dir + "'");
    }
    mo << manifest.dump(2) << "\n";
    written.push_back("manifest.json");
    return written;
}

measurement_bundle read_measurement_dir(const std::string& dir) {
    const fs::path base(dir);
    if (!fs::is_directory(base)) {
        throw data_error("'" + dir + "' is not a directory");
    }
    measurement_bundle out;
    srm_measurement_set& meas = out.meas;

    const fs::path manifest_path = base / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json m;
        try {
            in >> m;
        } catch (const json::exception& e) {
            throw data_error(manifest_path.string() + ": " + e.what());
        }
        try {
            out.mode = srm_mode_from_string(m.at("mode").get<std::string>());
            meas.side =
                side_from_string(m.at("network_load_side").get<std::string>());
            const json& roles = m.at("roles");
            for (const json& name : roles.at("loads")) {
                meas.loads.push_back(
                    read_touchstone((base / name.get<std::string>()).string()));
            }
            meas.network = read_touchstone(
                (base / roles.at("network").get<std::string>()).string());
            for (const json& name : roles.at("network_loads")) {
                meas.network_loads.push_back(
                    read_touchstone((base / name.get<std::string>()).string()));
            }
            meas.match_left = read_touchstone(
                (base / roles.at("match_left").get<std::string>()).string());
            meas.match_right = read_touchstone(
                (base / roles.at("match_right").get<std::string>()).string());
            const frequency_network dl = read_touchstone(
                (base / roles.at("match_def_left").get<std::string>()).string());
            const frequency_network dr = read_touchstone(
                (base / roles.at("match_def_right").get<std::string>()).string());
            std::vector<complex> gl, gr;
            for (std::size_t i = 0; i < dl.size(); ++i) gl.push_back(dl.gamma(i));
            for (std::size_t i = 0; i < dr.size(); ++i) gr.push_back(dr.gamma(i));
            meas.match_def = match_definition::from_gammas(gl, gr);
            const json& est = m.at("estimate");
            meas.estimate.load_index = est.at("load_index").get<std::size_t>();
            meas.estimate.load_gamma =
                complex{est.at("load_gamma")[0].get<double>(),
                        est.at("load_gamma")[1].get<double>()};
            meas.estimate.network_delay_s =
                est.at("network_delay_s").get<double>();
            if (est.contains("load_gamma_sweep")) {
                for (const json& p : est.at("load_gamma_sweep")) {
                    meas.estimate.load_gamma_sweep.push_back(
                        complex{p[0].get<double>(), p[1].get<double>()});
                }
            }
        } catch (const json::exception& e) {
            throw data_error(manifest_path.string() + ": " + e.what());
        }
        return out;
    }

    // Naming-convention fallback: load_<i>.s2p etc.
    for (std::size_t i = 0;; ++i) {
        const fs::path p = base / ("load_" + std::to_string(i) + ".s2p");
        if (!fs::exists(p)) break;
        meas.loads.push_back(read_touchstone(p.string()));
    }
    if (meas.loads.size() < 3) {
        throw data_error("'" + dir +
                         "': no manifest and fewer than 3 load_<i>.s2p files");
    }
    auto need = [&](const std::string& name) {
        const fs::path p = base / name;
        if (!fs::exists(p)) {
            throw data_error("'" + dir + "': missing required file '" + name +
                             "' (role unresolved)");
        }
        return read_touchstone(p.string());
    };
    meas.network = need("network.s2p");
    for (std::size_t i = 0; i < meas.loads.size(); ++i) {
        const fs::path p = base / ("network_load_" + std::to_string(i) + ".s1p");
        if (fs::exists(p)) meas.network_loads.push_back(read_touchstone(p.string()));
    }
    meas.match_left = need("match_left.s1p");
    meas.match_right = need("match_right.s1p");
    const frequency_network dl = need("match_def_left.s1p");
    const frequency_network dr = need("match_def_right.s1p");
    std::vector<complex> gl, gr;
    for (std::size_t i = 0; i < dl.size(); ++i) gl.push_back(dl.gamma(i));
    for (std::size_t i = 0; i < dr.size(); ++i) gr.push_back(dr.gamma(i));
    meas.match_def = match_definition::from_gammas(gl, gr);
    return out;
}

} // namespace srmcal
