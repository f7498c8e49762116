#include "srmcal/srm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace srmcal {

namespace {

constexpr double pi = 3.14159265358979323846;

double wrap_angle(double a) {
    while (a > pi) a -= 2.0 * pi;
    while (a < -pi) a += 2.0 * pi;
    return a;
}

template <typename E>
[[noreturn]] void rethrow_tagged(const E& e, std::size_t index, double f_hz) {
    std::ostringstream os;
    os << "frequency index " << index << " (" << f_hz << " Hz): " << e.what();
    throw E(os.str());
}

// Re-raise preserving the concrete exception type so callers can still
// discriminate failure modes, with the frequency attached.
template <typename Fn>
auto at_frequency(std::size_t index, double f_hz, Fn&& fn) {
    try {
        return fn();
    } catch (const non_transmissive& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const singular_conversion& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const singular_matrix& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const pole_input& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const rank_deficient& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const degenerate_eigen& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const normalization_failure& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const sign_undecidable& e) {
        rethrow_tagged(e, index, f_hz);
    } catch (const numerical_error& e) {
        rethrow_tagged(e, index, f_hz);
    }
}

} // namespace

const char* to_string(srm_mode mode) {
    switch (mode) {
    case srm_mode::thru: return "thru";
    case srm_mode::full_network: return "full-network";
    case srm_mode::half_network: return "half-network";
    }
    return "?";
}

const char* to_string(network_load_side side) {
    return side == network_load_side::left ? "left" : "right";
}

srm_mode srm_mode_from_string(const std::string& s) {
    if (s == "thru") return srm_mode::thru;
    if (s == "full-network" || s == "full") return srm_mode::full_network;
    if (s == "half-network" || s == "half") return srm_mode::half_network;
    throw config_error("unknown mode '" + s +
                       "' (expected thru, full-network or half-network)");
}

network_load_side side_from_string(const std::string& s) {
    if (s == "left") return network_load_side::left;
    if (s == "right") return network_load_side::right;
    throw config_error("unknown network-load side '" + s + "'");
}

match_definition match_definition::from_gammas(std::vector<complex> left,
                                               std::vector<complex> right) {
    if (left.size() != right.size()) {
        throw data_error("match definition: per-port lengths differ");
    }
    match_definition def;
    def.gamma_left = std::move(left);
    def.gamma_right = std::move(right);
    return def;
}

match_definition match_definition::from_impedances(
    const std::vector<complex>& z_left, const std::vector<complex>& z_right,
    complex z_ref_left, complex z_ref_right) {
    if (z_left.size() != z_right.size()) {
        throw data_error("match definition: per-port lengths differ");
    }
    match_definition def;
    def.gamma_left.reserve(z_left.size());
    def.gamma_right.reserve(z_right.size());
    for (std::size_t i = 0; i < z_left.size(); ++i) {
        def.gamma_left.push_back((z_left[i] - z_ref_left) /
                                 (z_left[i] + z_ref_left));
        def.gamma_right.push_back((z_right[i] - z_ref_right) /
                                  (z_right[i] + z_ref_right));
    }
    return def;
}

cross_map_result solve_h(const std::vector<reflection_pair>& load_pairs,
                         const solve_options& opts) {
    cross_map_options cmo;
    cmo.min_load_separation = opts.min_load_separation;
    cmo.rank_tol = opts.rank_tol;
    return solve_cross_map(load_pairs, cmo);
}

cross_map_result solve_f(const std::vector<complex>& load_gamma_a,
                         const std::vector<complex>& load_gamma_b,
                         const std::vector<complex>& network_load_gamma,
                         network_load_side side, const solve_options& opts) {
    if (load_gamma_a.size() != load_gamma_b.size() ||
        load_gamma_a.size() != network_load_gamma.size()) {
        throw data_error("solve_f: load and network-load lists differ in length");
    }
    std::vector<reflection_pair> pairs;
    pairs.reserve(load_gamma_a.size());
    for (std::size_t i = 0; i < load_gamma_a.size(); ++i) {
        if (side == network_load_side::left) {
            // F_a maps the plain right-port load to the network-load seen
            // from the left.
            pairs.push_back({network_load_gamma[i], load_gamma_b[i]});
        } else {
            // F_b maps the network-load seen from the right to the plain
            // left-port load.
            pairs.push_back({load_gamma_a[i], network_load_gamma[i]});
        }
    }
    cross_map_options cmo;
    cmo.min_load_separation = opts.min_load_separation;
    cmo.rank_tol = opts.rank_tol;
    return solve_cross_map(pairs, cmo);
}

namespace {

matrix2 inverse_named(const matrix2& m, double floor, const char* name) {
    if (std::abs(m.det()) < floor) {
        throw singular_matrix(std::string("virtual thru: |det ") + name +
                              "| below floor");
    }
    return inverse(m, floor);
}

} // namespace

matrix2 virtual_thru_full(const matrix2& h, const matrix2& f,
                          const matrix2& m_net, network_load_side side,
                          const solve_options& opts) {
    const matrix2 p = port_swap();
    const matrix2 f_inv = inverse_named(f, opts.det_floor, "F");
    if (side == network_load_side::left) {
        return h * f_inv * m_net;
    }
    return m_net * p * f_inv * h * p;
}

matrix2 virtual_thru_half(const matrix2& h, const matrix2& f,
                          const matrix2& m_net, network_load_side side,
                          const solve_options& opts) {
    const matrix2 p = port_swap();
    const matrix2 f_inv = inverse_named(f, opts.det_floor, "F");
    const matrix2 h_inv = inverse_named(h, opts.det_floor, "H");
    if (side == network_load_side::left) {
        return h * f_inv * m_net * p * h_inv * f * p;
    }
    return f * h_inv * m_net * p * f_inv * h * p;
}

eigen_split_result eigen_split(const matrix2& m_thru, const matrix2& h,
                               const solve_options& opts) {
    const matrix2 p = port_swap();
    const matrix2 h_inv = inverse_named(h, opts.det_floor, "H");
    const matrix2 xa = m_thru * p * h_inv;
    const matrix2 xb = (p * h_inv * m_thru).transpose();

    const eigen2_result ea = eigen2(xa);
    const double lmax = std::max(std::abs(ea.lambda1), std::abs(ea.lambda2));
    const double lsep = std::abs(ea.lambda1 - ea.lambda2);
    if (lmax == 0.0 || lsep < opts.degenerate_eigen_tol * lmax) {
        throw degenerate_eigen("eigen_split: eigenvalues coincide, |l1-l2| = " +
                               std::to_string(lsep));
    }
    // The healthy spectrum is a +/- pair; a dominant sum means the
    // eigenstructure collapsed even if rounding keeps |l1-l2| nonzero.
    const double skew = std::abs(ea.lambda1 + ea.lambda2) / lsep;
    if (skew > opts.degenerate_skew_tol) {
        throw degenerate_eigen(
            "eigen_split: eigenvalue sum dominates the separation (skew = " +
            std::to_string(skew) + ")");
    }

    const eigen2_result eb = eigen2(xb);

    auto normalize = [&](const complex& first, const complex& second) {
        const double norm = std::abs(first) + std::abs(second);
        if (std::abs(second) < opts.normalization_floor * norm) {
            throw normalization_failure(
                "eigen_split: eigenvector second component vanishes");
        }
        return first / second;
    };

    eigen_split_result out;
    out.lambda1 = ea.lambda1;
    out.lambda2 = ea.lambda2;
    out.separation = lsep / lmax;
    out.skew = skew;
    out.wa1 = normalize(ea.v1_first, ea.v1_second);
    out.wa2 = normalize(ea.v2_first, ea.v2_second);

    // Align port B's pair with port A's eigenvalue order; the two matrices
    // share the same spectrum.
    const bool direct = std::abs(eb.lambda1 - ea.lambda1) <=
                        std::abs(eb.lambda2 - ea.lambda1);
    if (direct) {
        out.wb1 = normalize(eb.v1_first, eb.v1_second);
        out.wb2 = normalize(eb.v2_first, eb.v2_second);
    } else {
        out.wb1 = normalize(eb.v2_first, eb.v2_second);
        out.wb2 = normalize(eb.v1_first, eb.v1_second);
    }
    return out;
}

namespace {

std::array<complex, 4> port_row(const defined_reflection& d, port_side port) {
    if (port == port_side::left) {
        return {-d.rho_defined, complex{-1.0, 0.0},
                d.gamma_measured * d.rho_defined, d.gamma_measured};
    }
    return {-d.rho_defined, complex{1.0, 0.0},
            -d.gamma_measured * d.rho_defined, d.gamma_measured};
}

matrix2 solve_port_nullspace(const std::vector<std::array<complex, 4>>& rows,
                             port_side port, const solve_options& opts) {
    const nullspace_result ns = smallest_singular_vector(rows);
    if (ns.rank_gap < opts.rank_tol) {
        throw rank_deficient(
            "port error solve: system rank below 3 (defined standard "
            "degenerate with eigenvector rows?)");
    }
    if (std::abs(ns.vector[3]) < opts.normalization_floor) {
        throw normalization_failure(
            "port error solve: last nullspace element vanishes");
    }
    const complex x0 = ns.vector[0] / ns.vector[3];
    const complex x1 = ns.vector[1] / ns.vector[3];
    const complex x2 = ns.vector[2] / ns.vector[3];
    if (port == port_side::left) {
        // Unknowns (a11, a12, a21, 1).
        return {x0, x1, x2, complex{1.0, 0.0}};
    }
    // Unknowns (b11, b21, b12, 1).
    return {x0, x2, x1, complex{1.0, 0.0}};
}

} // namespace

matrix2 solve_port_errors(const complex& w11, const complex& w12,
                          const std::vector<defined_reflection>& defined,
                          port_side port, const solve_options& opts) {
    if (defined.empty()) {
        throw data_error("solve_port_errors: need at least one defined standard");
    }
    std::vector<std::array<complex, 4>> rows;
    rows.reserve(2 + defined.size());
    rows.push_back({complex{-1.0, 0.0}, complex{-1.0, 0.0}, w11, w11});
    rows.push_back({complex{1.0, 0.0}, complex{-1.0, 0.0}, -w12, w12});
    for (const defined_reflection& d : defined) {
        rows.push_back(port_row(d, port));
    }
    return solve_port_nullspace(rows, port, opts);
}

matrix2 solve_port_errors_defined(const std::vector<defined_reflection>& defined,
                                  port_side port, const solve_options& opts) {
    if (defined.size() < 3) {
        throw rank_deficient(
            "defined-standards solve: need at least 3 standards, got " +
            std::to_string(defined.size()));
    }
    std::vector<std::array<complex, 4>> rows;
    rows.reserve(defined.size());
    for (const defined_reflection& d : defined) {
        rows.push_back(port_row(d, port));
    }
    return solve_port_nullspace(rows, port, opts);
}

std::pair<complex, complex> k_candidates(const matrix2& a, const matrix2& b,
                                         const matrix2& m_net,
                                         const solve_options& opts) {
    const matrix2 n_scaled =
        inverse(a, opts.det_floor) * m_net * inverse(b, opts.det_floor);
    const complex k = std::sqrt(n_scaled.det());
    return {k, -k};
}

k_sign_selector::choice k_sign_selector::select(const complex& k_plus,
                                                const complex& s21_plus,
                                                double phase_est) {
    const double band = opts_.k_indecision_band_deg * pi / 180.0;
    const double delta =
        std::abs(wrap_angle(std::arg(s21_plus) - phase_est));
    const bool indecisive = std::abs(delta - 0.5 * pi) < band;

    choice out;
    if (!indecisive) {
        out.k = delta < 0.5 * pi ? k_plus : -k_plus;
    } else if (opts_.cross_frequency_continuity && have_prev_) {
        out.k = std::abs(wrap_angle(std::arg(k_plus) - std::arg(prev_))) <=
                        0.5 * pi
                    ? k_plus
                    : -k_plus;
        out.from_continuity = true;
    } else {
        throw sign_undecidable(
            "k sign: estimate indecisive and no neighboring frequency anchor");
    }
    prev_ = out.k;
    have_prev_ = true;
    return out;
}

std::vector<std::size_t> k_phase_jumps(const std::vector<error_terms>& terms) {
    std::vector<std::size_t> out;
    if (terms.size() < 3) return out;
    std::vector<double> steps(terms.size() - 1);
    for (std::size_t i = 1; i < terms.size(); ++i) {
        steps[i - 1] = wrap_angle(std::arg(terms[i].k) -
                                  std::arg(terms[i - 1].k));
    }
    std::vector<double> sorted(steps);
    std::sort(sorted.begin(), sorted.end());
    const double typical = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (std::abs(wrap_angle(steps[i] - typical)) > 0.5 * pi) {
            out.push_back(i + 1);
        }
    }
    return out;
}

complex correct_reflection(const error_terms& terms, const complex& raw_gamma,
                           port_side port, double floor) {
    if (port == port_side::left) {
        return mobius_apply(mobius_inverse(terms.a_matrix(), floor), raw_gamma,
                            floor);
    }
    // rho = (Gamma_b + b21) / (b12 Gamma_b + b11)
    const complex den = terms.b12 * raw_gamma + terms.b11;
    if (std::abs(den) < floor) {
        throw pole_input("correct_reflection: port B denominator below floor");
    }
    return (raw_gamma + terms.b21) / den;
}

// ---------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------

namespace {

struct per_frequency_state {
    matrix2 h;
    matrix2 m_net_t;
    matrix2 m_thru;
    eigen_split_result eig;
    frequency_diagnostics diag;
};

void validate_set(const srm_measurement_set& meas, srm_mode mode) {
    if (meas.loads.size() < 3) {
        throw data_error("measurement set: need at least 3 load standards");
    }
    for (const frequency_network& l : meas.loads) {
        if (l.ports != 2) {
            throw data_error("measurement set: load standards must be two-port");
        }
    }
    if (meas.network.ports != 2) {
        throw data_error("measurement set: network standard must be two-port");
    }
    if (mode != srm_mode::thru) {
        if (meas.network_loads.size() != meas.loads.size()) {
            throw data_error(
                "measurement set: network-load count must equal load count");
        }
        for (const frequency_network& n : meas.network_loads) {
            if (n.ports != 1) {
                throw data_error(
                    "measurement set: network-load sweeps must be one-port");
            }
        }
    }
    if (meas.match_left.ports != 1 || meas.match_right.ports != 1) {
        throw data_error("measurement set: match sweeps must be one-port");
    }
    if (meas.estimate.load_index >= meas.loads.size()) {
        throw config_error("measurement set: disambiguation load index out of range");
    }

    std::vector<const frequency_network*> nets;
    for (const frequency_network& l : meas.loads) nets.push_back(&l);
    nets.push_back(&meas.network);
    if (mode != srm_mode::thru) {
        for (const frequency_network& n : meas.network_loads) nets.push_back(&n);
    }
    nets.push_back(&meas.match_left);
    nets.push_back(&meas.match_right);
    for (const defined_one_port& d : meas.extra_defined) {
        nets.push_back(&d.measured);
    }
    assert_common_grid(nets);

    const std::size_t n = meas.network.size();
    if (meas.match_def.gamma_left.size() != n ||
        meas.match_def.gamma_right.size() != n) {
        throw data_error("measurement set: match definition grid mismatch");
    }
    for (const defined_one_port& d : meas.extra_defined) {
        if (d.defined_gamma.size() != n) {
            throw data_error(
                "measurement set: extra defined standard grid mismatch");
        }
    }
    if (!meas.estimate.network_s21.empty() &&
        meas.estimate.network_s21.size() != n) {
        throw data_error("measurement set: network s21 estimate grid mismatch");
    }
    if (!meas.estimate.load_gamma_sweep.empty() &&
        meas.estimate.load_gamma_sweep.size() != n) {
        throw data_error("measurement set: load estimate sweep grid mismatch");
    }
}

// Accumulates repeated warnings into one line each.
class warning_tally {
public:
    void add(const std::string& key, std::size_t freq_index) {
        auto& e = entries_[key];
        if (e.count == 0) e.first_index = freq_index;
        ++e.count;
    }
    void flush(std::vector<std::string>& out) const {
        for (const auto& [key, e] : entries_) {
            std::ostringstream os;
            os << key << " at " << e.count << " frequency point"
               << (e.count == 1 ? "" : "s") << " (first at index "
               << e.first_index << ")";
            out.push_back(os.str());
        }
    }

private:
    struct entry {
        std::size_t count = 0;
        std::size_t first_index = 0;
    };
    std::map<std::string, entry> entries_;
};

} // namespace

calibration_result calibrate(const srm_measurement_set& meas, srm_mode mode,
                             const solve_options& opts) {
    validate_set(meas, mode);
    const std::size_t n_freq = meas.network.size();
    const std::size_t n_loads = meas.loads.size();

    // Stage 1: per-frequency cross maps, virtual thru and eigen split.
    std::vector<per_frequency_state> state(n_freq);
    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        const double f_hz = meas.network.frequencies_hz[fi];
        at_frequency(fi, f_hz, [&] {
            per_frequency_state& st = state[fi];

            std::vector<reflection_pair> pairs;
            pairs.reserve(n_loads);
            for (const frequency_network& load : meas.loads) {
                pairs.push_back({load.data[fi].s11, load.data[fi].s22});
            }
            const cross_map_result hres = solve_h(pairs, opts);
            st.h = hres.h;
            st.diag.h_quality = hres.quality;
            st.diag.h_rank_gap = hres.rank_gap;

            st.m_net_t = s_to_t(meas.network.data[fi], opts.transmissivity_floor);

            if (mode == srm_mode::thru) {
                st.m_thru = st.m_net_t;
            } else {
                std::vector<complex> ga(n_loads), gb(n_loads), gn(n_loads);
                for (std::size_t i = 0; i < n_loads; ++i) {
                    ga[i] = meas.loads[i].data[fi].s11;
                    gb[i] = meas.loads[i].data[fi].s22;
                    gn[i] = meas.network_loads[i].gamma(fi);
                }
                const cross_map_result fres =
                    solve_f(ga, gb, gn, meas.side, opts);
                st.diag.f_quality = fres.quality;
                st.diag.f_rank_gap = fres.rank_gap;
                st.m_thru = mode == srm_mode::full_network
                                ? virtual_thru_full(st.h, fres.h, st.m_net_t,
                                                    meas.side, opts)
                                : virtual_thru_half(st.h, fres.h, st.m_net_t,
                                                    meas.side, opts);
            }

            st.eig = eigen_split(st.m_thru, st.h, opts);
            st.diag.eigen_separation = st.eig.separation;
            st.diag.eigen_skew = st.eig.skew;
            return 0;
        });
    }

    // Stage 2: solve both eigenvector-order hypotheses at every frequency
    // and price each against the designated-load estimate. The two ports
    // are resolved jointly; the eigenvalue pairing ties their orders.
    struct hypothesis {
        std::vector<std::optional<matrix2>> a, b;
        double cost = 0.0;
    };
    std::array<hypothesis, 2> hyp;
    for (auto& h : hyp) {
        h.a.resize(n_freq);
        h.b.resize(n_freq);
    }

    const frequency_network& anchor = meas.loads[meas.estimate.load_index];
    constexpr double invalid_penalty = 1e6;

    std::array<std::vector<double>, 2> cost_per_freq;
    cost_per_freq[0].assign(n_freq, 0.0);
    cost_per_freq[1].assign(n_freq, 0.0);

    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        for (int hidx = 0; hidx < 2; ++hidx) {
            const eigen_split_result& eig = state[fi].eig;
            const complex w11a = hidx == 0 ? eig.wa1 : eig.wa2;
            const complex w12a = hidx == 0 ? eig.wa2 : eig.wa1;
            const complex w11b = hidx == 0 ? eig.wb1 : eig.wb2;
            const complex w12b = hidx == 0 ? eig.wb2 : eig.wb1;

            std::vector<defined_reflection> defined_a = {
                {meas.match_left.gamma(fi), meas.match_def.gamma_left[fi]}};
            std::vector<defined_reflection> defined_b = {
                {meas.match_right.gamma(fi), meas.match_def.gamma_right[fi]}};
            for (const defined_one_port& d : meas.extra_defined) {
                if (d.side == port_side::left) {
                    defined_a.push_back({d.measured.gamma(fi), d.defined_gamma[fi]});
                } else {
                    defined_b.push_back({d.measured.gamma(fi), d.defined_gamma[fi]});
                }
            }

            const complex gamma_est =
                meas.estimate.load_gamma_sweep.empty()
                    ? meas.estimate.load_gamma
                    : meas.estimate.load_gamma_sweep[fi];

            double cost = invalid_penalty;
            try {
                const matrix2 a = solve_port_errors(w11a, w12a, defined_a,
                                                    port_side::left, opts);
                const matrix2 b = solve_port_errors(w11b, w12b, defined_b,
                                                    port_side::right, opts);
                error_terms t;
                t.a11 = a.e11;
                t.a12 = a.e12;
                t.a21 = a.e21;
                t.b11 = b.e11;
                t.b12 = b.e12;
                t.b21 = b.e21;
                t.k = 1.0;
                const complex rho_a = correct_reflection(
                    t, anchor.data[fi].s11, port_side::left, opts.det_floor);
                const complex rho_b = correct_reflection(
                    t, anchor.data[fi].s22, port_side::right, opts.det_floor);
                cost = std::abs(rho_a - gamma_est) + std::abs(rho_b - gamma_est);
                hyp[hidx].a[fi] = a;
                hyp[hidx].b[fi] = b;
            } catch (const numerical_error&) {
                // Wrong-order hypotheses may be unsolvable; penalize, do
                // not abort.
            }
            cost_per_freq[hidx][fi] = cost;
            hyp[hidx].cost += cost;
        }
        if (!hyp[0].a[fi] && !hyp[1].a[fi]) {
            at_frequency(fi, meas.network.frequencies_hz[fi], [&]() -> int {
                throw rank_deficient(
                    "port error solve failed for both eigenvector orderings");
            });
        }
    }

    calibration_result result;
    result.diagnostics.resize(n_freq);
    warning_tally tally;

    // Stage 3: pick the ordering. The estimate cost decides each frequency
    // on its own; when a point is indecisive, eigenvector continuity with
    // the previous chosen point breaks the tie. The frequency-summed costs
    // then grade the overall confidence of the choice.
    std::vector<int> chosen(n_freq, 0);
    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        frequency_diagnostics& diag = result.diagnostics[fi];
        diag = state[fi].diag;

        const double c0 = cost_per_freq[0][fi];
        const double c1 = cost_per_freq[1][fi];
        const double cmax = std::max(c0, c1);
        const double margin = cmax > 0.0 ? std::abs(c0 - c1) / cmax : 0.0;
        diag.hypothesis_margin = margin;

        int pick = c1 < c0 ? 1 : 0;
        if (margin < opts.ambiguity_margin) {
            diag.warning |= 4;
            if (opts.cross_frequency_continuity && fi > 0 &&
                hyp[chosen[fi - 1]].a[fi - 1]) {
                const eigen_split_result& eig = state[fi].eig;
                const matrix2& prev_a = *hyp[chosen[fi - 1]].a[fi - 1];
                const complex prev_w11 = (prev_a.e11 + prev_a.e12) /
                                         (prev_a.e21 + complex{1.0, 0.0});
                pick = std::abs(eig.wa1 - prev_w11) <=
                               std::abs(eig.wa2 - prev_w11)
                           ? 0
                           : 1;
                diag.order_from_continuity = 1;
            }
        }
        if (!hyp[pick].a[fi]) {
            pick = 1 - pick;
            tally.add("hypothesis fallback: preferred ordering unsolvable", fi);
        }
        chosen[fi] = pick;
    }

    double sum_chosen = 0.0, sum_other = 0.0;
    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        sum_chosen += cost_per_freq[chosen[fi]][fi];
        sum_other += cost_per_freq[1 - chosen[fi]][fi];
    }
    const double sum_max = std::max(sum_chosen, sum_other);
    result.hypothesis_margin =
        sum_max > 0.0 ? std::abs(sum_chosen - sum_other) / sum_max : 0.0;
    if (result.hypothesis_margin < opts.ambiguity_margin) {
        result.ambiguous = true;
        result.warnings.push_back(
            "AmbiguousChoice: eigenvector-order hypotheses differ by " +
            std::to_string(result.hypothesis_margin * 100.0) +
            "% in frequency-summed disambiguation cost");
    }

    // Stage 4: per-frequency k, then the sign-continuity post-pass. The k
    // extracted from the determinant always normalizes the calibrated
    // network to det = 1, so reciprocity cannot be checked from the data
    // here; a declared non-reciprocal network flags k instead.
    result.model.frequencies_hz = meas.network.frequencies_hz;
    result.model.terms.resize(n_freq);
    k_sign_selector k_selector(opts);

    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        const double f_hz = meas.network.frequencies_hz[fi];
        const matrix2& a = *hyp[chosen[fi]].a[fi];
        const matrix2& b = *hyp[chosen[fi]].b[fi];

        error_terms t;
        t.a11 = a.e11;
        t.a12 = a.e12;
        t.a21 = a.e21;
        t.b11 = b.e11;
        t.b12 = b.e12;
        t.b21 = b.e21;

        frequency_diagnostics& diag = result.diagnostics[fi];

        at_frequency(fi, f_hz, [&] {
            const matrix2 scaled = inverse(a, opts.det_floor) * state[fi].m_net_t *
                                   inverse(b, opts.det_floor);
            if (mode == srm_mode::thru) {
                // Defined thru: direct extraction, no sign ambiguity.
                t.k = 0.5 * (scaled.e11 + scaled.e22);
                if (std::abs(t.k) == 0.0) {
                    throw numerical_error("thru k extraction: k = 0");
                }
                const matrix2 res = scaled - (t.k * matrix2::identity());
                diag.thru_residual = res.max_abs() / std::abs(t.k);
                if (diag.thru_residual > opts.reciprocity_tol) {
                    tally.add("thru-mode residual above tolerance; the "
                              "network is not a thru",
                              fi);
                    diag.warning |= 2;
                }
            } else {
                const complex k_plus = std::sqrt(scaled.det());
                if (std::abs(k_plus) == 0.0) {
                    throw numerical_error("k solve: det of corrected network is 0");
                }
                // Compare calibrated s21 phase against the estimate.
                // s21 of (1/k) * scaled is k / scaled.e22.
                const double phase_est =
                    meas.estimate.network_s21.empty()
                        ? -2.0 * pi * f_hz * meas.estimate.network_delay_s
                        : std::arg(meas.estimate.network_s21[fi]);
                const k_sign_selector::choice ch =
                    k_selector.select(k_plus, k_plus / scaled.e22, phase_est);
                diag.k_sign_from_continuity = ch.from_continuity ? 1 : 0;
                t.k = ch.k;
                if (!meas.network_reciprocal) {
                    tally.add("network standard declared not reciprocal; "
                              "k term unreliable",
                              fi);
                    diag.warning |= 2;
                }
            }
            return 0;
        });

        result.model.terms[fi] = t;
    }

    if (mode != srm_mode::thru && opts.cross_frequency_continuity) {
        for (std::size_t fi : k_phase_jumps(result.model.terms)) {
            tally.add("k sign continuity jump", fi);
            result.diagnostics[fi].warning |= 1;
        }
    }

    tally.flush(result.warnings);
    validate(result.model);
    return result;
}

frequency_network apply_correction(const error_model& model,
                                   const frequency_network& raw_dut,
                                   const solve_options& opts) {
    validate(model);
    validate(raw_dut);
    if (!grids_match(model.frequencies_hz, raw_dut.frequencies_hz)) {
        throw grid_mismatch("apply_correction: '" +
                            (raw_dut.label.empty() ? std::string("DUT")
                                                   : raw_dut.label) +
                            "' grid does not match the error model");
    }
    frequency_network out = raw_dut;
    out.label = raw_dut.label.empty() ? "corrected" : raw_dut.label + " (corrected)";
    if (raw_dut.ports == 1) {
        for (std::size_t fi = 0; fi < raw_dut.size(); ++fi) {
            out.data[fi].s11 = correct_reflection(
                model.terms[fi], raw_dut.data[fi].s11, port_side::left,
                opts.det_floor);
        }
        return out;
    }
    for (std::size_t fi = 0; fi < raw_dut.size(); ++fi) {
        const double f_hz = raw_dut.frequencies_hz[fi];
        at_frequency(fi, f_hz, [&] {
            const error_terms& t = model.terms[fi];
            const matrix2 m = s_to_t(raw_dut.data[fi], opts.transmissivity_floor);
            const matrix2 cal = (complex{1.0, 0.0} / t.k) *
                                (inverse(t.a_matrix(), opts.det_floor) * m *
                                 inverse(t.b_matrix(), opts.det_floor));
            out.data[fi] = t_to_s(cal, opts.transmissivity_floor);
            return 0;
        });
    }
    return out;
}

void write_diagnostics_csv(const calibration_result& result,
                           const std::vector<double>& frequencies_hz,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open '" + path + "' for writing");
    }
    out << "frequency_hz,h_quality,h_rank_gap,f_quality,f_rank_gap,"
           "eigen_separation,eigen_skew,hypothesis_margin,thru_residual,"
           "order_from_continuity,k_sign_from_continuity,warning\n";
    char buf[512];
    for (std::size_t fi = 0; fi < result.diagnostics.size(); ++fi) {
        const frequency_diagnostics& d = result.diagnostics[fi];
        std::snprintf(
            buf, sizeof(buf),
            "%.16g,%.16g,%.16g,%.16g,%.16g,%.16g,%.16g,%.16g,%.16g,%d,%d,%d\n",
            frequencies_hz[fi], d.h_quality, d.h_rank_gap, d.f_quality,
            d.f_rank_gap, d.eigen_separation, d.eigen_skew, d.hypothesis_margin,
            d.thru_residual, d.order_from_continuity, d.k_sign_from_continuity,
            d.warning);
        out << buf;
    }
}

} // namespace srmcal
