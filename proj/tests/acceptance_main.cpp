// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run via ctest (test name "acceptance") or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "srmcal/mc.hpp"
#include "srmcal/solr.hpp"
#include "srmcal/touchstone.hpp"
#include "support.hpp"

using namespace srmcal;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", num,
                name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

void report_soft(int num, const std::string& name, const std::string& detail) {
    std::printf("REPORT criterion %d: %s (%s)\n", num, name.c_str(),
                detail.c_str());
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// --------------------------------------------------------------------
// 1. Noiseless exactness: 100 seeds x 3 modes, 20-point 1-150 GHz grid.
// --------------------------------------------------------------------
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_at;
    bool ok = true;
    for (std::uint64_t seed = 0; seed < 100 && ok; ++seed) {
        for (srm_mode mode : {srm_mode::thru, srm_mode::full_network,
                              srm_mode::half_network}) {
            kit_config kit = default_kit();
            kit.mode = mode;
            const error_model boxes =
                random_error_model(kit.frequencies_hz, seed);
            perturbation_spec pert;
            pert.seed = seed;
            try {
                const synthetic_set set =
                    make_srm_set(kit, boxes, pert, no_sources);
                const calibration_result res = calibrate(set.meas, mode);
                const double diff = test::models_rel_diff(res.model, boxes);
                if (diff > worst) {
                    worst = diff;
                    std::ostringstream os;
                    os << "seed " << seed << " " << to_string(mode);
                    worst_at = os.str();
                }
            } catch (const error& e) {
                ok = false;
                worst_at = std::string("threw: ") + e.what();
                worst = 1.0;
            }
        }
    }
    const double secs = elapsed_s(t0);
    std::ostringstream os;
    os << "worst rel err " << worst << " at " << worst_at << ", " << secs
       << " s";
    report(1, "noiseless exactness, 100 seeds x 3 modes < 1e-8",
           ok && worst < 1e-8 && secs < 10.0, os.str());
}

// --------------------------------------------------------------------
// 2. Virtual-thru identities over 100 random instances.
// --------------------------------------------------------------------
void criterion_2() {
    auto r = test::make_rng(0xACC2);
    const matrix2 p = port_swap();
    double worst_full = 0.0, worst_half = 0.0;
    for (int i = 0; i < 100; ++i) {
        const error_terms t = test::random_terms(r);
        const matrix2 a = t.a_matrix();
        const matrix2 b = t.b_matrix();
        const complex nu = test::ring(r, 0.2, 5.0);
        const complex eta = test::ring(r, 0.2, 5.0);
        const matrix2 h = nu * (a * p * b * p);
        const matrix2 kab = t.k * (a * b);

        sparams n_s = test::random_two_port(r);
        const matrix2 n_t = s_to_t(n_s);
        const matrix2 fa_full = eta * (a * n_t * p * b * p);
        const matrix2 m_net_full = t.k * (a * n_t * b);
        worst_full = std::max(
            worst_full,
            test::projective_diff(virtual_thru_full(h, fa_full, m_net_full,
                                                    network_load_side::left),
                                  kab));

        const matrix2 rr = test::random_box(r);
        const matrix2 n_sym = rr * p * inverse(rr) * p;
        const matrix2 fa_half = eta * (a * rr * p * b * p);
        const matrix2 m_net_half = t.k * (a * n_sym * b);
        const matrix2 half = virtual_thru_half(h, fa_half, m_net_half,
                                               network_load_side::left);
        worst_half = std::max(worst_half,
                              test::max_entry_diff(half, kab) / kab.max_abs());
    }
    std::ostringstream os;
    os << "full (normalized) " << worst_full << ", half (raw) " << worst_half;
    report(2, "virtual-thru identities, full < 1e-10 / half < 1e-9",
           worst_full < 1e-10 && worst_half < 1e-9, os.str());
}

// --------------------------------------------------------------------
// 3. SRM == SOLR on shared noiseless synthetic data.
// --------------------------------------------------------------------
void criterion_3() {
    double worst = 0.0;
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 200; seed < 210; ++seed) {
        kit_config kit = default_kit();
        const error_model boxes = random_error_model(kit.frequencies_hz, seed);
        perturbation_spec pert;
        pert.seed = seed;
        try {
            const synthetic_set set = make_srm_set(kit, boxes, pert, no_sources);
            const calibration_result srm_res = calibrate(set.meas, kit.mode);
            std::vector<solr_standard> standards;
            for (std::size_t i = 0; i < set.meas.loads.size(); ++i) {
                solr_standard s;
                s.name = kit.loads[i].name;
                s.measured = set.meas.loads[i];
                s.defined_left = set.nominal_load_gamma[i];
                s.defined_right = set.nominal_load_gamma[i];
                standards.push_back(std::move(s));
            }
            const calibration_result solr_res = solr_calibrate(
                standards, set.meas.network, set.meas.estimate);
            worst = std::max(worst, test::models_rel_diff(srm_res.model,
                                                          solr_res.model));
        } catch (const error& e) {
            ok = false;
            detail = e.what();
        }
    }
    std::ostringstream os;
    os << "worst entrywise rel diff " << worst;
    if (!detail.empty()) os << ", threw: " << detail;
    report(3, "SRM == SOLR cross-check < 1e-8 (10 seeds)", ok && worst < 1e-8,
           os.str());
}

// --------------------------------------------------------------------
// 4. Eigenstructure checks against the closed forms.
// --------------------------------------------------------------------
void criterion_4() {
    auto r = test::make_rng(0xACC4);
    const matrix2 p = port_swap();
    double worst_sum = 0.0, worst_vec = 0.0;
    for (int i = 0; i < 100; ++i) {
        const error_terms t = test::random_terms(r);
        const matrix2 a = t.a_matrix();
        const matrix2 b = t.b_matrix();
        const complex nu = test::ring(r, 0.2, 5.0);
        const matrix2 h = nu * (a * p * b * p);
        const matrix2 m_thru = t.k * (a * b);
        const eigen_split_result es = eigen_split(m_thru, h);

        worst_sum = std::max(worst_sum, std::abs(es.lambda1 + es.lambda2) /
                                            std::abs(es.lambda1 - es.lambda2));

        const complex wa1 = (t.a11 + t.a12) / (t.a21 + 1.0);
        const complex wa2 = (-t.a11 + t.a12) / (-t.a21 + 1.0);
        const complex wb1 = (t.b11 + t.b21) / (t.b12 + 1.0);
        const complex wb2 = (-t.b11 + t.b21) / (-t.b12 + 1.0);
        const double direct =
            std::max(std::max(std::abs(es.wa1 - wa1), std::abs(es.wa2 - wa2)),
                     std::max(std::abs(es.wb1 - wb1), std::abs(es.wb2 - wb2)));
        const double swapped =
            std::max(std::max(std::abs(es.wa1 - wa2), std::abs(es.wa2 - wa1)),
                     std::max(std::abs(es.wb1 - wb2), std::abs(es.wb2 - wb1)));
        worst_vec = std::max(worst_vec, std::min(direct, swapped));
    }
    std::ostringstream os;
    os << "max |l1+l2|/|l1-l2| " << worst_sum << ", max eigenvector dev "
       << worst_vec;
    report(4, "eigenvalue antisymmetry and closed-form eigenvectors < 1e-10",
           worst_sum < 1e-10 && worst_vec < 1e-10, os.str());
}

// --------------------------------------------------------------------
// 5. Non-reciprocal network: A, B recovered, k flagged.
// --------------------------------------------------------------------
void criterion_5() {
    auto r = test::make_rng(0xACC5);
    const error_model boxes = random_error_model(linspace(1e9, 150e9, 20), 500);
    sparams n_s = test::random_two_port(r);
    n_s.s12 = n_s.s21 * std::polar(1.25, -0.3);

    srm_measurement_set meas;
    meas.side = network_load_side::left;
    const std::vector<complex> rhos = {{-0.95, -0.05}, {0.96, 0.03}, {0.01, 0.02}};
    const std::size_t n_freq = boxes.size();
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        std::vector<sparams> data(n_freq);
        std::vector<complex> g(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            data[fi].s11 = embed_left(boxes.terms[fi], rhos[i]);
            data[fi].s22 = embed_right(boxes.terms[fi], rhos[i]);
            g[fi] = embed_left_through(boxes.terms[fi], s_to_t(n_s), rhos[i]);
        }
        meas.loads.push_back(make_two_port(boxes.frequencies_hz, data,
                                           {50.0, 0.0},
                                           "load_" + std::to_string(i)));
        meas.network_loads.push_back(
            make_one_port(boxes.frequencies_hz, g, {50.0, 0.0},
                          "network_load_" + std::to_string(i)));
    }
    std::vector<sparams> net(n_freq);
    std::vector<complex> est(n_freq), ml(n_freq), mr(n_freq),
        mdef(n_freq, complex{0.0, 0.0});
    for (std::size_t fi = 0; fi < n_freq; ++fi) {
        net[fi] = embed_two_port(boxes.terms[fi], n_s);
        est[fi] = n_s.s21;
        ml[fi] = embed_left(boxes.terms[fi], {0.0, 0.0});
        mr[fi] = embed_right(boxes.terms[fi], {0.0, 0.0});
    }
    meas.network = make_two_port(boxes.frequencies_hz, net, {50.0, 0.0}, "net");
    meas.match_left = make_one_port(boxes.frequencies_hz, ml, {50.0, 0.0}, "m");
    meas.match_right = make_one_port(boxes.frequencies_hz, mr, {50.0, 0.0}, "m");
    meas.match_def = match_definition::from_gammas(mdef, mdef);
    meas.estimate.load_index = 0;
    meas.estimate.load_gamma = rhos[0];
    meas.estimate.network_s21 = est;
    meas.network_reciprocal = false;

    bool ok = true;
    std::string detail;
    try {
        const calibration_result res = calibrate(meas, srm_mode::full_network);
        double worst_ab = 0.0;
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            const error_terms& g = res.model.terms[fi];
            const error_terms& w = boxes.terms[fi];
            worst_ab = std::max({worst_ab, test::rel_diff(g.a11, w.a11),
                                 test::rel_diff(g.a12, w.a12),
                                 test::rel_diff(g.a21, w.a21),
                                 test::rel_diff(g.b11, w.b11),
                                 test::rel_diff(g.b12, w.b12),
                                 test::rel_diff(g.b21, w.b21)});
        }
        bool flagged = false;
        for (const std::string& w : res.warnings) {
            if (w.find("not reciprocal") != std::string::npos) flagged = true;
        }
        const double k_dev = test::rel_diff(res.model.terms[0].k,
                                            boxes.terms[0].k);
        std::ostringstream os;
        os << "A/B worst rel err " << worst_ab << ", k flagged "
           << (flagged ? "yes" : "no") << ", k deviation " << k_dev;
        detail = os.str();
        ok = worst_ab < 1e-8 && flagged;
    } catch (const error& e) {
        ok = false;
        detail = std::string("threw: ") + e.what();
    }
    report(5, "non-reciprocal N: A/B < 1e-8, k flagged", ok, detail);
}

// --------------------------------------------------------------------
// 6. MC sanity at desk scale (200 runs, paper sigmas).
// --------------------------------------------------------------------
void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    const char* spar[4] = {"s11", "s21", "s12", "s22"};

    mc_config cfg;
    cfg.kit = default_kit();
    cfg.n_runs = 200;
    cfg.seed = 600;
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);

    // (a) zero-source limit: no spread, mean equals the reference.
    {
        mc_config zero = cfg;
        zero.sources = no_sources;
        zero.include_budget = false;
        const mc_report rep = run_mc(zero, boxes);
        double max_std = 0.0, max_mean = 0.0;
        for (std::size_t p = 0; p < 4; ++p) {
            for (std::size_t fi = 0; fi < rep.frequencies_hz.size(); ++fi) {
                max_std = std::max(max_std, rep.main.stats[p][fi].std_mag);
                max_mean = std::max(max_mean,
                                    std::abs(rep.main.stats[p][fi].mean -
                                             rep.reference[p][fi]));
            }
        }
        std::ostringstream os;
        os << "max spread " << max_std << ", max |mean-ref| " << max_mean;
        report(6, "MC (a) zero-source limit", max_std == 0.0 && max_mean < 1e-8,
               os.str());
    }

    // Full-network campaign with the budget (also used for b and c).
    mc_config full = cfg;
    full.sources = all_sources;
    full.include_budget = true;
    full.jobs = 4;
    const mc_report rep_full = run_mc(full, boxes);

    // (b) mean convergence of the noise-only sub-campaign.
    {
        const mc_campaign* noise = nullptr;
        for (const mc_campaign& c : rep_full.budget) {
            if (c.source_label == "noise") noise = &c;
        }
        std::size_t total = 0, good = 0;
        if (noise) {
            const double root_n = std::sqrt(static_cast<double>(noise->n_ok));
            for (std::size_t p = 0; p < 4; ++p) {
                for (std::size_t fi = 0; fi < rep_full.frequencies_hz.size();
                     ++fi) {
                    ++total;
                    const double dev = std::abs(noise->stats[p][fi].mean -
                                                rep_full.reference[p][fi]);
                    if (dev < 3.0 * noise->stats[p][fi].std_mag / root_n) {
                        ++good;
                    }
                }
            }
        }
        std::ostringstream os;
        os << good << "/" << total
           << " points within 3*std/sqrt(n) of the reference";
        report(6, "MC (b) noise-only mean convergence (>=95% of points)",
               noise != nullptr && total > 0 &&
                   static_cast<double>(good) >= 0.95 * static_cast<double>(total),
               os.str());
    }

    // (c) all-sources spread >= each single-source spread (median over
    // frequency, per S-parameter).
    {
        bool ok = true;
        std::ostringstream os;
        for (const mc_campaign& c : rep_full.budget) {
            for (std::size_t p = 0; p < 4; ++p) {
                const double all_med = median_spread(rep_full.main, p);
                const double one_med = median_spread(c, p);
                if (one_med > all_med * (1.0 + 1e-9)) {
                    ok = false;
                    os << c.source_label << "/" << spar[p] << " " << one_med
                       << " > " << all_med << "; ";
                }
            }
        }
        if (ok) os << "all medians dominated by the all-sources campaign";
        report(6, "MC (c) all-sources spread >= each single source", ok,
               os.str());
    }

    // (d) half-network vs full-network spread: reported, not gated.
    {
        mc_config half = cfg;
        half.kit.mode = srm_mode::half_network;
        half.sources = all_sources;
        half.include_budget = false;
        half.jobs = 4;
        const mc_report rep_half = run_mc(half, boxes);
        std::ostringstream os;
        int higher = 0;
        for (std::size_t p = 0; p < 4; ++p) {
            const double f = median_spread(rep_full.main, p);
            const double h = median_spread(rep_half.main, p);
            if (h >= f) ++higher;
            os << spar[p] << " full " << f << " half " << h << "; ";
        }
        os << higher << "/4 S-parameters show half >= full";
        report_soft(6, "MC (d) half-network vs full-network spread", os.str());
    }

    const double secs = elapsed_s(t0);
    std::ostringstream os;
    os << secs << " s";
    report(6, "MC campaigns runtime < 5 min", secs < 300.0, os.str());
}

// --------------------------------------------------------------------
// 7. Round-trip and format suites.
// --------------------------------------------------------------------
void criterion_7() {
    namespace fs = std::filesystem;
    auto r = test::make_rng(0xACC7);

    // Touchstone round trip at 1e-12.
    double worst_ts = 0.0;
    {
        std::vector<double> freqs = linspace(0.5e9, 120e9, 100);
        std::vector<sparams> data;
        for (int i = 0; i < 100; ++i) {
            sparams s;
            s.s11 = test::disk(r);
            s.s21 = test::disk(r);
            s.s12 = test::disk(r);
            s.s22 = test::disk(r);
            data.push_back(s);
        }
        const frequency_network net =
            make_two_port(freqs, data, {50.0, 0.0}, "rt");
        const std::string path =
            (fs::temp_directory_path() / "srmcal_acc_rt.s2p").string();
        write_touchstone(net, path);
        const frequency_network back = read_touchstone(path);
        for (std::size_t i = 0; i < net.size(); ++i) {
            worst_ts = std::max(
                {worst_ts, test::rel_diff(back.data[i].s11, net.data[i].s11),
                 test::rel_diff(back.data[i].s21, net.data[i].s21),
                 test::rel_diff(back.data[i].s12, net.data[i].s12),
                 test::rel_diff(back.data[i].s22, net.data[i].s22)});
        }
        fs::remove(path);
    }

    // Embed -> correct round trip at 1e-10.
    double worst_rt = 0.0;
    {
        const error_model boxes = random_error_model(linspace(1e9, 150e9, 20), 700);
        for (std::size_t fi = 0; fi < boxes.size(); ++fi) {
            const sparams dev = test::random_two_port(r);
            const sparams raw = embed_two_port(boxes.terms[fi], dev);
            std::vector<sparams> one = {raw};
            // single-point correction through the full path
            error_model m1;
            m1.frequencies_hz = {boxes.frequencies_hz[fi]};
            m1.terms = {boxes.terms[fi]};
            const frequency_network corrected = apply_correction(
                m1, make_two_port({boxes.frequencies_hz[fi]}, one, {50.0, 0.0},
                                  "x"));
            worst_rt = std::max(
                {worst_rt, std::abs(corrected.data[0].s11 - dev.s11),
                 std::abs(corrected.data[0].s21 - dev.s21),
                 std::abs(corrected.data[0].s12 - dev.s12),
                 std::abs(corrected.data[0].s22 - dev.s22)});
        }
    }

    // Load-list ordering invariance at 1e-12.
    double worst_perm = 0.0;
    std::string perm_note;
    {
        kit_config kit = default_kit();
        const error_model boxes = random_error_model(kit.frequencies_hz, 701);
        perturbation_spec pert;
        pert.seed = 701;
        try {
            const synthetic_set set = make_srm_set(kit, boxes, pert, no_sources);
            const calibration_result base = calibrate(set.meas, kit.mode);
            srm_measurement_set permuted = set.meas;
            std::swap(permuted.loads[0], permuted.loads[2]);
            std::swap(permuted.network_loads[0], permuted.network_loads[2]);
            permuted.estimate.load_index = 2;
            const calibration_result perm = calibrate(permuted, kit.mode);
            worst_perm = test::models_rel_diff(base.model, perm.model);
        } catch (const error& e) {
            worst_perm = 1.0;
            perm_note = e.what();
        }
    }

    std::ostringstream os;
    os << "touchstone " << worst_ts << ", embed/correct " << worst_rt
       << ", permutation " << worst_perm << " " << perm_note;
    report(7, "round-trip suites (1e-12 / 1e-10 / 1e-12)",
           worst_ts < 1e-12 && worst_rt < 1e-10 && worst_perm < 1e-12,
           os.str());
}

// --------------------------------------------------------------------
// 8. Failure-mode fixtures.
// --------------------------------------------------------------------
srm_measurement_set identity_set(const std::vector<complex>& rhos,
                                 std::size_t n_freq = 2) {
    error_model boxes;
    boxes.frequencies_hz = linspace(1e9, 2e9, n_freq);
    error_terms ident;
    ident.a11 = ident.b11 = 1.0;
    ident.a12 = ident.a21 = ident.b12 = ident.b21 = 0.0;
    ident.k = 1.0;
    boxes.terms.assign(n_freq, ident);

    srm_measurement_set meas;
    meas.side = network_load_side::left;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        std::vector<sparams> data(n_freq);
        std::vector<complex> g(n_freq);
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            data[fi].s11 = rhos[i];
            data[fi].s22 = rhos[i];
            g[fi] = rhos[i];
        }
        meas.loads.push_back(make_two_port(boxes.frequencies_hz, data,
                                           {50.0, 0.0},
                                           "load_" + std::to_string(i)));
        meas.network_loads.push_back(
            make_one_port(boxes.frequencies_hz, g, {50.0, 0.0},
                          "network_load_" + std::to_string(i)));
    }
    std::vector<sparams> net(n_freq, sparams::thru());
    meas.network = make_two_port(boxes.frequencies_hz, net, {50.0, 0.0}, "net");
    std::vector<complex> zero(n_freq, complex{0.0, 0.0});
    meas.match_left = make_one_port(boxes.frequencies_hz, zero, {50.0, 0.0}, "m");
    meas.match_right = make_one_port(boxes.frequencies_hz, zero, {50.0, 0.0}, "m");
    meas.match_def = match_definition::from_gammas(zero, zero);
    meas.estimate.load_index = 0;
    meas.estimate.load_gamma = rhos[0];
    return meas;
}

void criterion_8() {
    bool rank_ok = false, trans_ok = false, degen_ok = false, ambig_ok = false;
    std::ostringstream os;

    // RankDeficient: only 2 unique loads.
    try {
        srm_measurement_set meas = identity_set(
            {complex{-1.0, 0.0}, complex{1.0, 0.0}, complex{1.0, 0.0}});
        (void)calibrate(meas, srm_mode::thru);
        os << "rank-deficient fixture did not throw; ";
    } catch (const rank_deficient&) {
        rank_ok = true;
    } catch (const error& e) {
        os << "rank fixture wrong type: " << e.what() << "; ";
    }

    // NonTransmissive: network with s21 = 0.
    try {
        srm_measurement_set meas = identity_set(
            {complex{-1.0, 0.0}, complex{1.0, 0.0}, complex{0.5, 0.0}});
        std::vector<sparams> dark(meas.network.size());
        meas.network =
            make_two_port(meas.network.frequencies_hz, dark, {50.0, 0.0}, "dark");
        (void)calibrate(meas, srm_mode::thru);
        os << "non-transmissive fixture did not throw; ";
    } catch (const non_transmissive&) {
        trans_ok = true;
    } catch (const error& e) {
        os << "transmissive fixture wrong type: " << e.what() << "; ";
    }

    // DegenerateEigen: network replaced by t_to_s(H*P).
    try {
        const error_model boxes = random_error_model(linspace(1e9, 2e9, 2), 800);
        std::vector<sparams> data2(2);
        srm_measurement_set meas = identity_set(
            {complex{-1.0, 0.0}, complex{1.0, 0.0}, complex{0.5, 0.0}});
        // Rebuild loads/match through the random boxes so H is nontrivial.
        const std::vector<complex> rhos = {{-1.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}};
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            std::vector<sparams> data(2);
            for (std::size_t fi = 0; fi < 2; ++fi) {
                data[fi].s11 = embed_left(boxes.terms[fi], rhos[i]);
                data[fi].s22 = embed_right(boxes.terms[fi], rhos[i]);
            }
            meas.loads[i] = make_two_port(boxes.frequencies_hz, data,
                                          {50.0, 0.0}, "load");
        }
        std::vector<complex> ml(2), mr(2), mdef(2, complex{0.0, 0.0});
        for (std::size_t fi = 0; fi < 2; ++fi) {
            ml[fi] = embed_left(boxes.terms[fi], {0.0, 0.0});
            mr[fi] = embed_right(boxes.terms[fi], {0.0, 0.0});
        }
        meas.match_left = make_one_port(boxes.frequencies_hz, ml, {50.0, 0.0}, "m");
        meas.match_right = make_one_port(boxes.frequencies_hz, mr, {50.0, 0.0}, "m");
        meas.match_def = match_definition::from_gammas(mdef, mdef);
        const matrix2 p = port_swap();
        for (std::size_t fi = 0; fi < 2; ++fi) {
            const matrix2 h = boxes.terms[fi].a_matrix() * p *
                              boxes.terms[fi].b_matrix() * p;
            data2[fi] = t_to_s(h * p);
        }
        meas.network =
            make_two_port(boxes.frequencies_hz, data2, {50.0, 0.0}, "degen");
        (void)calibrate(meas, srm_mode::thru);
        os << "degenerate fixture did not throw; ";
    } catch (const degenerate_eigen&) {
        degen_ok = true;
    } catch (const error& e) {
        os << "degenerate fixture wrong type: " << e.what() << "; ";
    }

    // AmbiguousChoice: symmetric hypothesis costs (estimate 0 with identity
    // boxes), surfaced as a warning-carrying result.
    try {
        srm_measurement_set meas = identity_set(
            {complex{-1.0, 0.0}, complex{1.0, 0.0}, complex{0.5, 0.0}});
        meas.estimate.load_gamma = {0.0, 0.0};
        const calibration_result res = calibrate(meas, srm_mode::thru);
        ambig_ok = res.ambiguous && !res.warnings.empty() &&
                   res.warnings.front().find("AmbiguousChoice") !=
                       std::string::npos;
        if (!ambig_ok) os << "ambiguous fixture not flagged; ";
    } catch (const error& e) {
        os << "ambiguous fixture threw: " << e.what() << "; ";
    }

    if (rank_ok && trans_ok && degen_ok && ambig_ok) {
        os << "all four fixtures raised deterministically";
    }
    report(8, "failure-mode coverage (RankDeficient, NonTransmissive, "
              "DegenerateEigen, AmbiguousChoice)",
           rank_ok && trans_ok && degen_ok && ambig_ok, os.str());
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures > 0) {
        std::printf("%d criterion check(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
