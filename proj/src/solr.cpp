#include "srmcal/solr.hpp"

#include <cmath>

namespace srmcal {

namespace {
constexpr double pi = 3.14159265358979323846;
}

calibration_result solr_calibrate(const std::vector<solr_standard>& standards,
                                  const frequency_network& reciprocal,
                                  const disambiguation_estimate& estimate,
                                  const solve_options& opts) {
    if (standards.size() < 3) {
        throw rank_deficient("solr_calibrate: need at least 3 defined standards");
    }
    std::vector<const frequency_network*> nets;
    for (const solr_standard& s : standards) nets.push_back(&s.measured);
    nets.push_back(&reciprocal);
    assert_common_grid(nets);
    if (reciprocal.ports != 2) {
        throw data_error("solr_calibrate: reciprocal standard must be two-port");
    }
    const std::size_t n_freq = reciprocal.size();
    for (const solr_standard& s : standards) {
        if (s.measured.ports != 2) {
            throw data_error("solr_calibrate: standard '" + s.name +
                             "' must be two-port shaped");
        }
        if (s.defined_left.size() != n_freq || s.defined_right.size() != n_freq) {
            throw data_error("solr_calibrate: definition grid mismatch for '" +
                             s.name + "'");
        }
    }

    // At least three standards must be distinct, mirroring the SRM load
    // check; extra duplicates only add redundancy.
    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        std::vector<complex> kept;
        for (const solr_standard& s : standards) {
            bool unique = true;
            for (const complex& seen : kept) {
                if (std::abs(s.defined_left[fi] - seen) <
                    opts.min_load_separation) {
                    unique = false;
                    break;
                }
            }
            if (unique) kept.push_back(s.defined_left[fi]);
        }
        if (kept.size() < 3) {
            throw rank_deficient(
                "solr_calibrate: only " + std::to_string(kept.size()) +
                " distinct standards at frequency index " + std::to_string(fi) +
                ", need at least 3");
        }
    }

    calibration_result result;
    result.model.frequencies_hz = reciprocal.frequencies_hz;
    result.model.terms.resize(n_freq);
    result.diagnostics.resize(n_freq);
    k_sign_selector k_selector(opts);

    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        std::vector<defined_reflection> rows_a, rows_b;
        rows_a.reserve(standards.size());
        rows_b.reserve(standards.size());
        for (const solr_standard& s : standards) {
            rows_a.push_back({s.measured.data[fi].s11, s.defined_left[fi]});
            rows_b.push_back({s.measured.data[fi].s22, s.defined_right[fi]});
        }
        const matrix2 a = solve_port_errors_defined(rows_a, port_side::left, opts);
        const matrix2 b = solve_port_errors_defined(rows_b, port_side::right, opts);

        error_terms t;
        t.a11 = a.e11;
        t.a12 = a.e12;
        t.a21 = a.e21;
        t.b11 = b.e11;
        t.b12 = b.e12;
        t.b21 = b.e21;

        const double f_hz = reciprocal.frequencies_hz[fi];
        const matrix2 m_net =
            s_to_t(reciprocal.data[fi], opts.transmissivity_floor);
        const matrix2 scaled =
            inverse(a, opts.det_floor) * m_net * inverse(b, opts.det_floor);
        const complex k_plus = std::sqrt(scaled.det());
        if (std::abs(k_plus) == 0.0) {
            throw numerical_error(
                "solr_calibrate: det of corrected reciprocal is 0 at index " +
                std::to_string(fi));
        }
        const double phase_est =
            estimate.network_s21.empty()
                ? -2.0 * pi * f_hz * estimate.network_delay_s
                : std::arg(estimate.network_s21[fi]);
        const k_sign_selector::choice ch =
            k_selector.select(k_plus, k_plus / scaled.e22, phase_est);
        t.k = ch.k;
        result.diagnostics[fi].k_sign_from_continuity = ch.from_continuity ? 1 : 0;
        result.model.terms[fi] = t;
    }

    validate(result.model);
    return result;
}

} // namespace srmcal
