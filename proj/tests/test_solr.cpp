#include <doctest.h>

#include "srmcal/solr.hpp"
#include "support.hpp"

using namespace srmcal;

namespace {

std::vector<solr_standard> defined_standards(const error_model& boxes,
                                             const std::vector<complex>& rhos) {
    std::vector<solr_standard> out;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        solr_standard s;
        s.name = "std_" + std::to_string(i);
        std::vector<sparams> data(boxes.size());
        s.defined_left.resize(boxes.size());
        s.defined_right.resize(boxes.size());
        for (std::size_t fi = 0; fi < boxes.size(); ++fi) {
            const reflection_pair p =
                test::embed_pair_direct(boxes.terms[fi], rhos[i]);
            data[fi].s11 = p.left;
            data[fi].s22 = p.right;
            s.defined_left[fi] = rhos[i];
            s.defined_right[fi] = rhos[i];
        }
        s.measured = make_two_port(boxes.frequencies_hz, data, {50.0, 0.0},
                                   s.name);
        out.push_back(std::move(s));
    }
    return out;
}

frequency_network reciprocal_net(const error_model& boxes, const sparams& n_s) {
    std::vector<sparams> data(boxes.size());
    for (std::size_t fi = 0; fi < boxes.size(); ++fi) {
        data[fi] = embed_two_port(boxes.terms[fi], n_s);
    }
    return make_two_port(boxes.frequencies_hz, data, {50.0, 0.0}, "recip");
}

const std::vector<complex> sol_rhos = {{-0.97, -0.04}, {0.95, 0.05},
                                       {0.01, -0.01}};

} // namespace

TEST_CASE("solr: ideal standards and identity boxes give the identity model") {
    error_model boxes;
    boxes.frequencies_hz = {1e9, 2e9};
    error_terms ident;
    ident.a11 = ident.b11 = 1.0;
    ident.a12 = ident.a21 = ident.b12 = ident.b21 = 0.0;
    ident.k = 1.0;
    boxes.terms = {ident, ident};
    const auto standards = defined_standards(
        boxes, {complex{-1.0, 0.0}, complex{1.0, 0.0}, complex{0.0, 0.0}});
    disambiguation_estimate est;
    est.network_delay_s = 0.0;
    const calibration_result res =
        solr_calibrate(standards, reciprocal_net(boxes, sparams::thru()), est);
    for (const error_terms& t : res.model.terms) {
        CHECK(std::abs(t.a11 - complex{1.0, 0.0}) < 1e-10);
        CHECK(std::abs(t.a12) < 1e-10);
        CHECK(std::abs(t.b21) < 1e-10);
        CHECK(std::abs(t.k - complex{1.0, 0.0}) < 1e-10);
    }
}

TEST_CASE("solr recovers synthetic boxes within 1e-9") {
    auto r = test::make_rng(90);
    const error_model boxes = random_error_model(linspace(1e9, 150e9, 8), 91);
    const auto standards = defined_standards(boxes, sol_rhos);
    const sparams n_s = test::random_two_port(r);
    disambiguation_estimate est;
    est.network_s21.assign(boxes.size(), n_s.s21);
    const calibration_result res =
        solr_calibrate(standards, reciprocal_net(boxes, n_s), est);
    CHECK(test::models_rel_diff(res.model, boxes) < 1e-9);
}

TEST_CASE("solr and srm agree on shared noiseless synthetic data") {
    kit_config kit = default_kit();
    kit.frequencies_hz = linspace(1e9, 150e9, 10);
    const error_model boxes = random_error_model(kit.frequencies_hz, 92);
    perturbation_spec pert;
    pert.seed = 92;
    const synthetic_set set = make_srm_set(kit, boxes, pert, no_sources);

    const calibration_result srm_res = calibrate(set.meas, kit.mode);

    // SOL definitions straight from the kit's nominal (here: exact) values.
    std::vector<solr_standard> standards;
    for (std::size_t i = 0; i < set.meas.loads.size(); ++i) {
        solr_standard s;
        s.name = "std_" + std::to_string(i);
        s.measured = set.meas.loads[i];
        s.defined_left = set.nominal_load_gamma[i];
        s.defined_right = set.nominal_load_gamma[i];
        standards.push_back(std::move(s));
    }
    const calibration_result solr_res =
        solr_calibrate(standards, set.meas.network, set.meas.estimate);

    CHECK(test::models_rel_diff(srm_res.model, solr_res.model) < 1e-8);
}

TEST_CASE("solr rejects non-distinct standards") {
    const error_model boxes = random_error_model(linspace(1e9, 10e9, 3), 93);
    auto standards = defined_standards(
        boxes, {complex{-0.9, 0.0}, complex{0.9, 0.0}, complex{0.9, 0.0}});
    disambiguation_estimate est;
    CHECK_THROWS_AS(
        (void)solr_calibrate(standards, reciprocal_net(boxes, sparams::thru()),
                             est),
        rank_deficient);
}
