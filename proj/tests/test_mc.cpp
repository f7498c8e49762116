#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "srmcal/mc.hpp"
#include "support.hpp"

using namespace srmcal;

TEST_CASE("error_metric_db: floor at identical values, exact arithmetic") {
    CHECK(error_metric_db({0.5, 0.2}, {0.5, 0.2}) == doctest::Approx(-300.0));
    // |diff| = 0.0316227766... -> -30 dB
    CHECK(error_metric_db({0.0316227766016838, 0.0}, {0.0, 0.0}) ==
          doctest::Approx(-30.0).epsilon(1e-4));
}

TEST_CASE("error_metric matches the direct formula on random pairs") {
    auto r = test::make_rng(110);
    std::vector<double> freqs = linspace(1e9, 10e9, 5);
    std::vector<sparams> a(5), b(5);
    for (int i = 0; i < 5; ++i) {
        a[i] = test::random_two_port(r);
        b[i] = test::random_two_port(r);
    }
    const auto table =
        error_metric(make_two_port(freqs, a, {50.0, 0.0}, "a"),
                     make_two_port(freqs, b, {50.0, 0.0}, "b"));
    for (int i = 0; i < 5; ++i) {
        const double expect = 20.0 * std::log10(std::abs(a[i].s21 - b[i].s21));
        CHECK(table[1][i] == doctest::Approx(expect).epsilon(1e-12));
    }
    const frequency_network short_grid =
        make_two_port(linspace(1e9, 10e9, 4),
                      std::vector<sparams>(4, a[0]), {50.0, 0.0}, "c");
    CHECK_THROWS_AS((void)error_metric(make_two_port(freqs, a, {50.0, 0.0}, "a"),
                                       short_grid),
                    grid_mismatch);
}

namespace {

mc_config small_config(source_mask sources, int runs, std::uint64_t seed) {
    mc_config cfg;
    cfg.kit = default_kit();
    cfg.kit.frequencies_hz = linspace(1e9, 150e9, 6);
    cfg.n_runs = runs;
    cfg.sources = sources;
    cfg.seed = seed;
    cfg.include_budget = false;
    return cfg;
}

} // namespace

TEST_CASE("run_mc: all sources disabled has zero spread and exact mean") {
    const mc_config cfg = small_config(no_sources, 4, 1);
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report rep = run_mc(cfg, boxes);
    CHECK(rep.main.n_ok == 4);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t fi = 0; fi < rep.frequencies_hz.size(); ++fi) {
            CHECK(rep.main.stats[p][fi].std_mag == 0.0);
            CHECK(std::abs(rep.main.stats[p][fi].mean - rep.reference[p][fi]) <
                  1e-8);
        }
    }
}

TEST_CASE("run_mc is bit-reproducible and job-count independent") {
    mc_config cfg = small_config(all_sources, 8, 7);
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report a = run_mc(cfg, boxes);
    cfg.jobs = 4;
    const mc_report b = run_mc(cfg, boxes);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t fi = 0; fi < a.frequencies_hz.size(); ++fi) {
            CHECK(a.main.stats[p][fi].mean == b.main.stats[p][fi].mean);
            CHECK(a.main.stats[p][fi].std_mag == b.main.stats[p][fi].std_mag);
            CHECK(a.main.stats[p][fi].lo95 == b.main.stats[p][fi].lo95);
        }
    }
}

TEST_CASE("run_mc budget campaigns cover each enabled source") {
    mc_config cfg = small_config(source_noise | source_match, 4, 3);
    cfg.include_budget = true;
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report rep = run_mc(cfg, boxes);
    REQUIRE(rep.budget.size() == 2);
    CHECK(rep.budget[0].source_label == "noise");
    CHECK(rep.budget[1].source_label == "match");
    CHECK(rep.main.source_label == "noise+match");
}

TEST_CASE("run_mc: noise-only spread is nonzero and mean stays close") {
    const mc_config cfg = small_config(source_noise, 32, 5);
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report rep = run_mc(cfg, boxes);
    double max_std = 0.0;
    for (std::size_t fi = 0; fi < rep.frequencies_hz.size(); ++fi) {
        max_std = std::max(max_std, rep.main.stats[1][fi].std_mag);
        // mean within a loose multiple of the standard error
        CHECK(std::abs(rep.main.stats[1][fi].mean - rep.reference[1][fi]) <
              10.0 * rep.main.stats[1][fi].std_mag / std::sqrt(32.0) + 1e-6);
    }
    CHECK(max_std > 1e-5);
}

TEST_CASE("run_mc aborts when the failure fraction is exceeded") {
    mc_config cfg = small_config(no_sources, 2, 1);
    // Duplicate loads make every calibration rank-deficient.
    cfg.kit.loads[1] = cfg.kit.loads[0];
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    CHECK_THROWS_AS((void)run_mc(cfg, boxes), calibration_failure_rate);
}

TEST_CASE("run_mc rejects fewer than 2 runs") {
    mc_config cfg = small_config(no_sources, 1, 1);
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    CHECK_THROWS_AS((void)run_mc(cfg, boxes), config_error);
}

TEST_CASE("percentile bounds flag changes the interval, not the mean") {
    mc_config cfg = small_config(source_noise, 16, 9);
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report gauss = run_mc(cfg, boxes);
    cfg.percentile_bounds = true;
    const mc_report pct = run_mc(cfg, boxes);
    CHECK(gauss.main.stats[0][0].mean == pct.main.stats[0][0].mean);
    bool any_diff = false;
    for (std::size_t fi = 0; fi < gauss.frequencies_hz.size(); ++fi) {
        if (gauss.main.stats[1][fi].lo95 != pct.main.stats[1][fi].lo95) {
            any_diff = true;
        }
    }
    CHECK(any_diff);
}

TEST_CASE("MC CSV and JSON summaries are written with the documented shape") {
    namespace fs = std::filesystem;
    mc_config cfg = small_config(source_noise | source_crosstalk, 4, 2);
    cfg.include_budget = true;
    const error_model boxes = fixture_error_model(cfg.kit.frequencies_hz);
    const mc_report rep = run_mc(cfg, boxes);
    const std::string csv = (fs::temp_directory_path() / "srmcal_mc.csv").string();
    const std::string js = (fs::temp_directory_path() / "srmcal_mc.json").string();
    write_mc_csv(rep, csv);
    write_mc_json_summary(rep, js);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "frequency,sparam,mean_re,mean_im,std_mag,lo95,hi95,source");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    // main + 2 budget campaigns, 4 sparams x 6 freqs each
    CHECK(rows == 3 * 4 * 6);
    fs::remove(csv);
    fs::remove(js);
}
