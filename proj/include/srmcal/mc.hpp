#ifndef SRMCAL_MC_HPP
#define SRMCAL_MC_HPP

#include "srmcal/synth.hpp"

namespace srmcal {

// 20*log10 of the error-vector magnitude, clamped at -300 dB.
double error_metric_db(const complex& cal, const complex& ref);

// Per S-parameter (s11, s21, s12, s22) per frequency. One-port inputs fill
// only the s11 slot.
std::array<std::vector<double>, 4> error_metric(const frequency_network& cal,
                                                const frequency_network& ref);

struct mc_config {
    kit_config kit;
    int n_runs = 200;
    source_mask sources = all_sources;
    std::uint64_t seed = 1; // base seed; run r uses mix(seed, r)
    bool percentile_bounds = false;
    double max_failure_fraction = 0.01;
    int jobs = 1;
    bool include_budget = true;
};

struct mc_stats {
    complex mean{0.0, 0.0}; // complex mean over runs
    double mean_mag = 0.0;  // mean of |S|
    double std_mag = 0.0;   // sample std of |S|
    double lo95 = 0.0;
    double hi95 = 0.0;
};

struct mc_campaign {
    std::string source_label;
    source_mask sources = 0;
    std::array<std::vector<mc_stats>, 4> stats; // per S-parameter, per frequency
    int n_ok = 0;
    std::vector<int> failed_runs;
    std::vector<std::string> failure_messages; // first few, for diagnostics
};

struct mc_report {
    std::vector<double> frequencies_hz;
    std::array<std::vector<complex>, 4> reference; // true DUT response
    mc_campaign main;
    std::vector<mc_campaign> budget; // one single-source campaign each
    int n_runs = 0;
    std::uint64_t seed = 0;
    bool percentile_bounds = false;
};

// Repeated generate -> calibrate -> correct cycles over the bundled DUT.
// Runs are independent; accumulation is in run-index order, so the report
// is bit-identical for a given config and seed regardless of job count.
mc_report run_mc(const mc_config& config, const error_model& boxes);

// CSV columns: frequency, sparam, mean_re, mean_im, std_mag, lo95, hi95, source
void write_mc_csv(const mc_report& report, const std::string& path);
void write_mc_json_summary(const mc_report& report, const std::string& path);

// Median over frequency of std_mag for one S-parameter of a campaign.
double median_spread(const mc_campaign& campaign, std::size_t sparam_index);

} // namespace srmcal

#endif
