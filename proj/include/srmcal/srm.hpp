#ifndef SRMCAL_SRM_HPP
#define SRMCAL_SRM_HPP

#include <optional>
#include <string>
#include <vector>

#include "srmcal/error_model.hpp"
#include "srmcal/mobius.hpp"

namespace srmcal {

enum class srm_mode { thru, full_network, half_network };
enum class network_load_side { left, right };
enum class port_side { left, right };

const char* to_string(srm_mode mode);
const char* to_string(network_load_side side);
srm_mode srm_mode_from_string(const std::string& s);
network_load_side side_from_string(const std::string& s);

// Defined match (or extra impedance standard): per-frequency true reflection
// per port. Built either from direct gammas or from a complex impedance via
// rho = (Z - Z_ref)/(Z + Z_ref).
struct match_definition {
    std::vector<complex> gamma_left;
    std::vector<complex> gamma_right;

    static match_definition from_gammas(std::vector<complex> left,
                                        std::vector<complex> right);
    static match_definition from_impedances(const std::vector<complex>& z_left,
                                            const std::vector<complex>& z_right,
                                            complex z_ref_left,
                                            complex z_ref_right);
};

// Approximate knowledge used only to resolve sign/order ambiguities.
struct disambiguation_estimate {
    std::size_t load_index = 0;          // which load standard is the anchor
    complex load_gamma{-1.0, 0.0};       // e.g. short ~ -1
    // Per-frequency refinement of load_gamma. Offset standards rotate far
    // from their lumped value across a wide sweep; when the approximate
    // sweep is known it should be supplied.
    std::vector<complex> load_gamma_sweep;
    double network_delay_s = 0.0;        // expected s21 phase = -2*pi*f*delay
    std::vector<complex> network_s21;    // optional per-frequency override
};

// Additional fully defined one-port standard (appended to the match rows).
struct defined_one_port {
    frequency_network measured; // one-port raw sweep
    std::vector<complex> defined_gamma;
    port_side side = port_side::left;
};

// Everything one SRM run consumes.
struct srm_measurement_set {
    std::vector<frequency_network> loads;         // two-port, s11/s22 used
    frequency_network network;                    // two-port raw (M_net)
    std::vector<frequency_network> network_loads; // one-port raw sweeps
    network_load_side side = network_load_side::left;
    frequency_network match_left;  // one-port raw
    frequency_network match_right; // one-port raw
    match_definition match_def;
    disambiguation_estimate estimate;
    std::vector<defined_one_port> extra_defined; // optional
    // Reciprocity of the network standard cannot be observed from SRM data
    // (it folds into k); the user declares it. One-port terms never depend
    // on it.
    bool network_reciprocal = true;
};

struct solve_options {
    double transmissivity_floor = 1e-30;
    double det_floor = 1e-30;
    double rank_tol = 1e-10;
    double min_load_separation = 0.01;
    double degenerate_eigen_tol = 1e-8; // |l1-l2| < tol*max(|l1|,|l2|)
    double degenerate_skew_tol = 1e6;   // |l1+l2|/|l1-l2| above this
    double normalization_floor = 1e-12; // vs nullspace vector norm
    double ambiguity_margin = 0.10;     // relative hypothesis-cost gap
    double reciprocity_tol = 0.05;      // thru-mode residual tolerance
    double k_indecision_band_deg = 10.0;
    bool cross_frequency_continuity = true;
};

// Chosen candidate eigenvectors for both ports at one frequency, aligned so
// index 1 of port A and port B share the same eigenvalue.
struct eigen_split_result {
    complex wa1, wa2;  // port A: first components, second normalized to 1
    complex wb1, wb2;  // port B, eigenvalue-matched to port A's order
    complex lambda1, lambda2;
    double separation; // |l1 - l2| / max
    double skew;       // |l1 + l2| / |l1 - l2|, ~0 when structure holds
};

struct frequency_diagnostics {
    double h_quality = 0.0;
    double h_rank_gap = 0.0;
    double f_quality = 0.0;
    double f_rank_gap = 0.0;
    double eigen_separation = 0.0;
    double eigen_skew = 0.0;
    double hypothesis_margin = 0.0;    // per-point ordering-cost gap
    double thru_residual = 0.0;        // thru mode: |A^-1 M B^-1 - kI|/|k|
    int order_from_continuity = 0;
    int k_sign_from_continuity = 0;
    int warning = 0; // bit 1: k jump, bit 2: k unreliable, bit 4: ambiguous
};

struct calibration_result {
    error_model model;
    std::vector<frequency_diagnostics> diagnostics;
    double hypothesis_margin = 0.0;
    bool ambiguous = false;
    std::vector<std::string> warnings;
};

// --- per-frequency building blocks ------------------------------------

// H = nu * A * P * B * P from the symmetric-load pairs (Gamma_a, Gamma_b).
cross_map_result solve_h(const std::vector<reflection_pair>& load_pairs,
                         const solve_options& opts = {});

// F_a (side = left) or F_b (side = right) from network-load sweeps paired
// with the plain load sweeps of the opposite port.
cross_map_result solve_f(const std::vector<complex>& load_gamma_a,
                         const std::vector<complex>& load_gamma_b,
                         const std::vector<complex>& network_load_gamma,
                         network_load_side side,
                         const solve_options& opts = {});

// M_thru proportional to k*A*B (unknown scalar) from the full network.
matrix2 virtual_thru_full(const matrix2& h, const matrix2& f,
                          const matrix2& m_net, network_load_side side,
                          const solve_options& opts = {});

// M_thru equal to k*A*B with the scalars cancelling analytically; valid
// only when the network standard is symmetric and f comes from half-network
// loads.
matrix2 virtual_thru_half(const matrix2& h, const matrix2& f,
                          const matrix2& m_net, network_load_side side,
                          const solve_options& opts = {});

// Eigenvectors of M_thru*P*H^-1 (port A) and (P*H^-1*M_thru)^T (port B).
// The returned ordering is one candidate; the other is the joint swap.
eigen_split_result eigen_split(const matrix2& m_thru, const matrix2& h,
                               const solve_options& opts = {});

// One defined reflection row of the per-port linear system.
struct defined_reflection {
    complex gamma_measured;
    complex rho_defined;
};

// Builds the 3x4 (or larger) system from the eigenvector rows plus one row
// per defined standard, solves its nullspace and normalizes the last entry
// to 1. Returns the error box with e22 = 1.
matrix2 solve_port_errors(const complex& w11, const complex& w12,
                          const std::vector<defined_reflection>& defined,
                          port_side port, const solve_options& opts = {});

// Defined-standards-only variant (no eigenvector rows); needs >= 3 rows.
matrix2 solve_port_errors_defined(const std::vector<defined_reflection>& defined,
                                  port_side port,
                                  const solve_options& opts = {});

// k^2 = det(A^-1 M_net B^-1); both sign candidates.
std::pair<complex, complex> k_candidates(const matrix2& a, const matrix2& b,
                                         const matrix2& m_net,
                                         const solve_options& opts = {});

// Sign choice for k across a sweep: the estimate decides; when the estimate
// sits near +/-90 degrees the previous frequency point anchors the sign.
class k_sign_selector {
public:
    explicit k_sign_selector(const solve_options& opts) : opts_(opts) {}

    struct choice {
        complex k;
        bool from_continuity = false;
    };

    // k_plus: principal square root candidate; s21_plus: calibrated network
    // s21 when using +k; phase_est: expected s21 phase in radians.
    choice select(const complex& k_plus, const complex& s21_plus,
                  double phase_est);

private:
    solve_options opts_;
    complex prev_{0.0, 0.0};
    bool have_prev_ = false;
};

// Indices where the phase step of k deviates from the sweep's typical step
// by more than 90 degrees: a sign-flip signature that stays quiet when k
// merely rotates quickly between coarse grid points.
std::vector<std::size_t> k_phase_jumps(const std::vector<error_terms>& terms);

// --- full pipeline ------------------------------------------------------

calibration_result calibrate(const srm_measurement_set& meas, srm_mode mode,
                             const solve_options& opts = {});

// Corrected DUT: S of (1/k) A^-1 T(raw) B^-1 per frequency. One-port
// inputs are corrected through port A; use correct_reflection for port B.
frequency_network apply_correction(const error_model& model,
                                   const frequency_network& raw_dut,
                                   const solve_options& opts = {});

// One-port correction at a single frequency: inverts the per-port Mobius
// relation between the true and measured reflection.
complex correct_reflection(const error_terms& terms, const complex& raw_gamma,
                           port_side port, double floor = 1e-30);

// Diagnostics CSV: one row per frequency.
void write_diagnostics_csv(const calibration_result& result,
                           const std::vector<double>& frequencies_hz,
                           const std::string& path);

} // namespace srmcal

#endif
