#include "srmcal/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <optional>
#include <thread>

#include <json.hpp>

#include "srmcal/version.hpp"

namespace srmcal {

using nlohmann::json;

double error_metric_db(const complex& cal, const complex& ref) {
    const double mag = std::abs(cal - ref);
    const double db = 20.0 * std::log10(std::max(mag, 0.0));
    return std::max(db, -300.0);
}

std::array<std::vector<double>, 4> error_metric(const frequency_network& cal,
                                                const frequency_network& ref) {
    validate(cal);
    validate(ref);
    if (!grids_match(cal.frequencies_hz, ref.frequencies_hz) ||
        cal.ports != ref.ports) {
        throw grid_mismatch("error_metric: '" + cal.label + "' and '" +
                            ref.label + "' do not share a grid/port count");
    }
    std::array<std::vector<double>, 4> out;
    const std::size_t n_params = cal.ports == 1 ? 1 : 4;
    for (std::size_t p = 0; p < n_params; ++p) out[p].resize(cal.size());
    for (std::size_t fi = 0; fi < cal.size(); ++fi) {
        const sparams& c = cal.data[fi];
        const sparams& r = ref.data[fi];
        out[0][fi] = error_metric_db(c.s11, r.s11);
        if (n_params == 4) {
            out[1][fi] = error_metric_db(c.s21, r.s21);
            out[2][fi] = error_metric_db(c.s12, r.s12);
            out[3][fi] = error_metric_db(c.s22, r.s22);
        }
    }
    return out;
}

namespace {

const std::array<const char*, 4> sparam_names = {"s11", "s21", "s12", "s22"};

complex pick(const sparams& s, std::size_t p) {
    switch (p) {
    case 0: return s.s11;
    case 1: return s.s21;
    case 2: return s.s12;
    default: return s.s22;
    }
}

// One campaign: n_runs independent generate->calibrate->correct cycles.
mc_campaign run_campaign(const mc_config& config, const error_model& boxes,
                         source_mask sources, const std::string& label) {
    const std::size_t n_freq = config.kit.frequencies_hz.size();
    const int n_runs = config.n_runs;

    std::vector<std::optional<frequency_network>> corrected(
        static_cast<std::size_t>(n_runs));
    std::vector<std::string> messages(static_cast<std::size_t>(n_runs));

    auto one_run = [&](int r) {
        perturbation_spec pert = config.kit.perturbation;
        pert.seed = rng::mix(config.seed, static_cast<std::uint64_t>(r));
        try {
            const synthetic_set set =
                make_srm_set(config.kit, boxes, pert, sources);
            const calibration_result cal =
                calibrate(set.meas, config.kit.mode);
            corrected[static_cast<std::size_t>(r)] =
                apply_correction(cal.model, set.dut_raw);
        } catch (const numerical_error& e) {
            messages[static_cast<std::size_t>(r)] = e.what();
        }
    };

    if (config.jobs > 1) {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= n_runs) break;
                one_run(r);
            }
        };
        std::vector<std::thread> pool;
        const int n_threads = std::min(config.jobs, n_runs);
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    } else {
        for (int r = 0; r < n_runs; ++r) one_run(r);
    }

    mc_campaign out;
    out.source_label = label;
    out.sources = sources;
    for (auto& v : out.stats) v.resize(n_freq);

    // Reduce in run order: deterministic regardless of the job count.
    std::vector<const frequency_network*> ok;
    ok.reserve(static_cast<std::size_t>(n_runs));
    for (int r = 0; r < n_runs; ++r) {
        if (corrected[static_cast<std::size_t>(r)]) {
            ok.push_back(&*corrected[static_cast<std::size_t>(r)]);
        } else {
            out.failed_runs.push_back(r);
            if (out.failure_messages.size() < 5) {
                out.failure_messages.push_back(
                    "run " + std::to_string(r) + ": " +
                    messages[static_cast<std::size_t>(r)]);
            }
        }
    }
    out.n_ok = static_cast<int>(ok.size());

    const double frac_failed =
        n_runs > 0 ? static_cast<double>(out.failed_runs.size()) / n_runs : 0.0;
    if (frac_failed > config.max_failure_fraction) {
        std::string msg = "MC campaign '" + label + "': " +
                          std::to_string(out.failed_runs.size()) + "/" +
                          std::to_string(n_runs) + " runs failed";
        for (const std::string& m : out.failure_messages) msg += "; " + m;
        throw calibration_failure_rate(msg);
    }
    if (out.n_ok == 0) {
        throw calibration_failure_rate("MC campaign '" + label +
                                       "': no successful runs");
    }

    for (std::size_t p = 0; p < 4; ++p) {
        std::vector<double> mags(ok.size());
        for (std::size_t fi = 0; fi < n_freq; ++fi) {
            // Offset-compensated accumulation in run order: deterministic,
            // and identical samples reduce to exactly zero spread.
            const complex base = pick(ok[0]->data[fi], p);
            const double mag_base = std::abs(base);
            complex dev_sum{0.0, 0.0};
            double mag_dev_sum = 0.0;
            for (std::size_t r = 0; r < ok.size(); ++r) {
                const complex v = pick(ok[r]->data[fi], p);
                dev_sum += v - base;
                mags[r] = std::abs(v);
                mag_dev_sum += mags[r] - mag_base;
            }
            mc_stats st;
            const double n = static_cast<double>(ok.size());
            st.mean = base + dev_sum / n;
            st.mean_mag = mag_base + mag_dev_sum / n;
            double ss = 0.0;
            for (std::size_t r = 0; r < ok.size(); ++r) {
                const double d = mags[r] - st.mean_mag;
                ss += d * d;
            }
            st.std_mag = ok.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            if (config.percentile_bounds && ok.size() > 1) {
                std::vector<double> sorted(mags);
                std::sort(sorted.begin(), sorted.end());
                auto quantile = [&](double q) {
                    const double pos = q * (n - 1.0);
                    const std::size_t lo = static_cast<std::size_t>(pos);
                    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
                    const double w = pos - static_cast<double>(lo);
                    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
                };
                st.lo95 = quantile(0.025);
                st.hi95 = quantile(0.975);
            } else {
                st.lo95 = st.mean_mag - 1.96 * st.std_mag;
                st.hi95 = st.mean_mag + 1.96 * st.std_mag;
            }
            out.stats[p][fi] = st;
        }
    }
    return out;
}

} // namespace

mc_report run_mc(const mc_config& config, const error_model& boxes) {
    if (config.n_runs < 2) {
        throw config_error("run_mc: need at least 2 runs");
    }
    mc_report report;
    report.frequencies_hz = config.kit.frequencies_hz;
    report.n_runs = config.n_runs;
    report.seed = config.seed;
    report.percentile_bounds = config.percentile_bounds;

    // Reference response of the bundled DUT (unperturbed truth).
    const frequency_network ref =
        line_network(config.kit.dut, config.kit.frequencies_hz, config.kit.z_ref,
                     "dut_reference");
    for (std::size_t p = 0; p < 4; ++p) {
        report.reference[p].resize(ref.size());
        for (std::size_t fi = 0; fi < ref.size(); ++fi) {
            report.reference[p][fi] = pick(ref.data[fi], p);
        }
    }

    std::string label;
    if (config.sources == no_sources) {
        label = "none";
    } else if (config.sources == all_sources) {
        label = "all";
    } else {
        for (unsigned bit = 1; bit <= source_crosstalk; bit <<= 1) {
            if (config.sources & bit) {
                if (!label.empty()) label += "+";
                label += source_name(static_cast<source_bit>(bit));
            }
        }
    }
    report.main = run_campaign(config, boxes, config.sources, label);

    if (config.include_budget) {
        for (unsigned bit = 1; bit <= source_crosstalk; bit <<= 1) {
            if ((config.sources & bit) && config.sources != bit) {
                report.budget.push_back(
                    run_campaign(config, boxes, bit,
                                 source_name(static_cast<source_bit>(bit))));
            }
        }
    }
    return report;
}

double median_spread(const mc_campaign& campaign, std::size_t sparam_index) {
    std::vector<double> v;
    v.reserve(campaign.stats[sparam_index].size());
    for (const mc_stats& st : campaign.stats[sparam_index]) {
        v.push_back(st.std_mag);
    }
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

namespace {

void write_campaign_rows(std::ofstream& out, const mc_report& report,
                         const mc_campaign& campaign) {
    char buf[512];
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t fi = 0; fi < report.frequencies_hz.size(); ++fi) {
            const mc_stats& st = campaign.stats[p][fi];
            std::snprintf(buf, sizeof(buf),
                          "%.16g,%s,%.16g,%.16g,%.16g,%.16g,%.16g,%s\n",
                          report.frequencies_hz[fi], sparam_names[p],
                          st.mean.real(), st.mean.imag(), st.std_mag, st.lo95,
                          st.hi95, campaign.source_label.c_str());
            out << buf;
        }
    }
}

} // namespace

void write_mc_csv(const mc_report& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open '" + path + "' for writing");
    }
    out << "frequency,sparam,mean_re,mean_im,std_mag,lo95,hi95,source\n";
    write_campaign_rows(out, report, report.main);
    for (const mc_campaign& c : report.budget) {
        write_campaign_rows(out, report, c);
    }
}

void write_mc_json_summary(const mc_report& report, const std::string& path) {
    json j;
    j["format"] = "srmcal-mc-summary";
    j["version"] = 1;
    j["tool_version"] = SRMCAL_VERSION;
    j["n_runs"] = report.n_runs;
    j["seed"] = report.seed;
    j["bounds"] = report.percentile_bounds ? "percentile" : "gaussian-1.96-sigma";
    j["bounds_note"] =
        "95% bounds computed on linear magnitude of each S-parameter";
    auto campaign_json = [&](const mc_campaign& c) {
        json cj;
        cj["source"] = c.source_label;
        cj["runs_ok"] = c.n_ok;
        cj["runs_failed"] = c.failed_runs;
        json med;
        for (std::size_t p = 0; p < 4; ++p) {
            med[sparam_names[p]] = median_spread(c, p);
        }
        cj["median_std_mag"] = med;
        return cj;
    };
    j["main"] = campaign_json(report.main);
    j["budget"] = json::array();
    for (const mc_campaign& c : report.budget) {
        j["budget"].push_back(campaign_json(c));
    }
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << "\n";
}

} // namespace srmcal
