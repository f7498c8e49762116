#ifndef SRMCAL_SYNTH_HPP
#define SRMCAL_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srmcal/srm.hpp"

namespace srmcal {

// ----------------------------------------------------------------------
// Deterministic RNG. splitmix64 core with Box-Muller gaussians, so a seed
// reproduces bit-identical draws on any platform. Independent draw streams
// are derived as mix(seed, stream_id): disabling one perturbation source
// never shifts the draws of another.
// ----------------------------------------------------------------------
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
    static rng for_stream(std::uint64_t seed, std::uint64_t stream_id) {
        return rng(mix(seed, stream_id));
    }

    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double gaussian(); // standard normal
    complex complex_gaussian(double sigma); // independent re/im, sigma/sqrt(2) each

private:
    std::uint64_t state_;
};

// Draw-stream ids, one block per standard and purpose.
namespace streams {
constexpr std::uint64_t load_left = 0x100;     // + load index
constexpr std::uint64_t load_right = 0x200;    // + load index
constexpr std::uint64_t netload_line = 0x300;  // + load index
constexpr std::uint64_t netload_load = 0x400;  // + load index
constexpr std::uint64_t crosstalk = 0x500;     // + load index
constexpr std::uint64_t noise = 0x600;         // + file index
constexpr std::uint64_t network_line = 0x700;
constexpr std::uint64_t match_left = 0x701;
constexpr std::uint64_t match_right = 0x702;
} // namespace streams

// ----------------------------------------------------------------------
// Parametric lossy transmission line: direct (Z0, gamma(f)) description.
// Conductor loss scales with sqrt(f), dielectric loss linearly with f.
// ----------------------------------------------------------------------
struct line_model {
    double length_m = 0.0;
    complex z0{50.0, 0.0};
    double eps_eff = 1.0;
    double loss_db_per_m_at_1ghz = 0.0;            // sqrt-f scaling
    double dielectric_loss_db_per_m_at_1ghz = 0.0; // linear-f scaling
};

// gamma = alpha + j*beta, Re(gamma) >= 0 for passive lines.
complex propagation_constant(const line_model& line, double f_hz);
sparams line_sparams(const line_model& line, double f_hz, complex z_ref);
matrix2 line_t(const line_model& line, double f_hz, complex z_ref);
frequency_network line_network(const line_model& line,
                               const std::vector<double>& freqs_hz,
                               complex z_ref, std::string label = {});

// ----------------------------------------------------------------------
// Lumped load standards (non-ideal short/open/match).
// series_l_shunt_rc: port -> series L0 -> (R parallel C0) to ground.
// shunt_c_series_rl: port -> (C0 to ground) -> series L0 -> R to ground.
// R may be infinite (open).
// ----------------------------------------------------------------------
enum class load_topology { series_l_shunt_rc, shunt_c_series_rl };

struct lumped_load {
    load_topology topology = load_topology::series_l_shunt_rc;
    double r_ohm = 50.0; // may be +inf
    double l0_h = 0.0;
    double c0_f = 0.0;
    std::optional<line_model> offset; // line segment in front of the element
};

// Reflection coefficient at the measurement plane (behind the offset line),
// referenced to z_ref.
complex load_gamma(const lumped_load& model, double f_hz, complex z_ref);

// ----------------------------------------------------------------------
// Error-box embedding (switch-term-free VNA model).
// ----------------------------------------------------------------------
sparams embed_two_port(const error_terms& t, const sparams& s_true,
                       double floor = 1e-30);
complex embed_left(const error_terms& t, const complex& rho);
complex embed_right(const error_terms& t, const complex& rho);
// One-port seen through a two-port (T-parameters net_t) in front of the load.
complex embed_left_through(const error_terms& t, const matrix2& net_t,
                           const complex& rho);
complex embed_right_through(const error_terms& t, const matrix2& net_t,
                            const complex& rho);

// ----------------------------------------------------------------------
// Perturbations and source selection.
// ----------------------------------------------------------------------
struct perturbation_spec {
    double noise_sigma = 0.001;          // additive complex gaussian per entry
    double element_variation = 0.10;     // relative, lumped elements
    double length_sigma_m = 20e-6;       // network standard length
    double line_param_variation = 0.01;  // relative, Z0 and gamma
    double crosstalk_c_sigma_f = 0.25e-15;
    std::uint64_t seed = 1;
};

enum source_bit : unsigned {
    source_noise = 1u,
    source_asymmetry = 2u,
    source_network = 4u,
    source_match = 8u,
    source_crosstalk = 16u,
};
using source_mask = unsigned;
constexpr source_mask all_sources = 31u;
constexpr source_mask no_sources = 0u;

source_mask source_from_name(const std::string& name);
const char* source_name(source_bit bit);

// ----------------------------------------------------------------------
// Calibration kit configuration (JSON-backed).
// ----------------------------------------------------------------------
struct named_load {
    std::string name;
    lumped_load model;
};

struct kit_config {
    std::vector<double> frequencies_hz;
    complex z_ref{50.0, 0.0};
    srm_mode mode = srm_mode::full_network;
    network_load_side side = network_load_side::left;
    std::vector<named_load> loads; // >= 3
    lumped_load match_model;       // nominal definition of the match
    line_model network;            // reciprocal standard (full length)
    line_model dut;                // bundled verification DUT
    perturbation_spec perturbation;
    std::size_t designated_load = 0;      // disambiguation anchor
    complex designated_gamma{-1.0, 0.0};  // its approximate reflection
    // Error boxes: path to an error-model JSON, or empty for the builtin
    // smooth fixture.
    std::string error_model_path;
};

kit_config default_kit();
kit_config kit_config_from_json_string(const std::string& text,
                                       const std::string& origin = "<config>");
kit_config load_kit_config(const std::string& path);
std::string kit_config_to_json_string(const kit_config& kit);

// Smooth frequency-dependent fixture boxes used when no file is given.
error_model fixture_error_model(const std::vector<double>& freqs_hz);
// Random well-conditioned boxes (tests, acceptance sweeps).
error_model random_error_model(const std::vector<double>& freqs_hz,
                               std::uint64_t seed);

// ----------------------------------------------------------------------
// Full synthetic measurement generation.
// ----------------------------------------------------------------------
struct synthetic_set {
    srm_measurement_set meas;
    frequency_network dut_raw;
    frequency_network dut_reference;
    // Unperturbed standard responses (identical at both ports), for defined
    // SOL-style definitions and oracles.
    std::vector<std::vector<complex>> nominal_load_gamma;
    std::vector<complex> nominal_match_gamma;
};

synthetic_set make_srm_set(const kit_config& kit, const error_model& boxes,
                           const perturbation_spec& pert,
                           source_mask enabled = all_sources);

// ----------------------------------------------------------------------
// Directory layout: load_<i>.s2p, network.s2p, network_load_<i>.s1p,
// match_left.s1p, match_right.s1p, match_def_left.s1p, match_def_right.s1p,
// dut.s2p, dut_reference.s2p, manifest.json.
// ----------------------------------------------------------------------
struct measurement_bundle {
    srm_measurement_set meas;
    srm_mode mode = srm_mode::full_network;
};

std::vector<std::string> write_measurement_dir(const synthetic_set& set,
                                               const kit_config& kit,
                                               const std::string& dir,
                                               const std::string& config_origin);
measurement_bundle read_measurement_dir(const std::string& dir);

} // namespace srmcal

#endif
