// srmcal: SRM two-port VNA calibration over Touchstone/JSON artifacts.
//
// Exit codes: 0 success, 2 usage/config, 3 data/parse, 4 numerical failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "srmcal/mc.hpp"
#include "srmcal/solr.hpp"
#include "srmcal/touchstone.hpp"
#include "srmcal/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

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

void write_run_manifest(const std::string& path, const std::string& command,
                        const json& inputs, const json& outputs,
                        std::uint64_t seed, const std::string& config_path) {
    json m;
    m["format"] = "srmcal-run-manifest";
    m["version"] = 1;
    m["command"] = command;
    m["tool_version"] = SRMCAL_VERSION;
    m["timestamp"] = iso_timestamp();
    m["config"] = config_path;
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) {
        throw srmcal::data_error("cannot write manifest '" + path + "'");
    }
    out << m.dump(2) << "\n";
}

srmcal::error_model resolve_boxes(const srmcal::kit_config& kit,
                                  const std::string& config_path) {
    if (kit.error_model_path.empty()) {
        return srmcal::fixture_error_model(kit.frequencies_hz);
    }
    fs::path p(kit.error_model_path);
    if (p.is_relative() && !config_path.empty()) {
        p = fs::path(config_path).parent_path() / p;
    }
    return srmcal::load_error_model(p.string());
}

struct simulate_args {
    std::string config;
    std::string out_dir;
    std::int64_t seed = -1;
};

int cmd_simulate(const simulate_args& args) {
    srmcal::kit_config kit = srmcal::load_kit_config(args.config);
    if (args.seed >= 0) {
        kit.perturbation.seed = static_cast<std::uint64_t>(args.seed);
    }
    const srmcal::error_model boxes = resolve_boxes(kit, args.config);
    const srmcal::synthetic_set set = srmcal::make_srm_set(
        kit, boxes, kit.perturbation, srmcal::all_sources);
    const auto files =
        srmcal::write_measurement_dir(set, kit, args.out_dir, args.config);
    std::cout << "wrote " << files.size() << " files to " << args.out_dir
              << "\n";
    return 0;
}

struct calibrate_args {
    std::string dir;
    std::string mode = "auto";
    std::string out = "error_model.json";
    std::string diagnostics;
    std::string export_prefix;
    std::string match_def_left;
    std::string match_def_right;
    bool no_continuity = false;
    bool non_reciprocal = false;
};

int cmd_calibrate(const calibrate_args& args) {
    srmcal::measurement_bundle bundle = srmcal::read_measurement_dir(args.dir);
    if (args.mode != "auto") {
        bundle.mode = srmcal::srm_mode_from_string(args.mode);
    }
    if (!args.match_def_left.empty() || !args.match_def_right.empty()) {
        if (args.match_def_left.empty() || args.match_def_right.empty()) {
            throw srmcal::config_error(
                "--match-def-left and --match-def-right must be given together");
        }
        const srmcal::frequency_network dl =
            srmcal::read_touchstone(args.match_def_left);
        const srmcal::frequency_network dr =
            srmcal::read_touchstone(args.match_def_right);
        std::vector<srmcal::complex> gl, gr;
        for (std::size_t i = 0; i < dl.size(); ++i) gl.push_back(dl.gamma(i));
        for (std::size_t i = 0; i < dr.size(); ++i) gr.push_back(dr.gamma(i));
        bundle.meas.match_def = srmcal::match_definition::from_gammas(gl, gr);
    }
    bundle.meas.network_reciprocal = !args.non_reciprocal;

    srmcal::solve_options opts;
    opts.cross_frequency_continuity = !args.no_continuity;
    const srmcal::calibration_result res =
        srmcal::calibrate(bundle.meas, bundle.mode, opts);

    srmcal::save_error_model(res.model, args.out);
    json outputs = {{"error_model", args.out}};
    if (!args.diagnostics.empty()) {
        srmcal::write_diagnostics_csv(res, res.model.frequencies_hz,
                                      args.diagnostics);
        outputs["diagnostics"] = args.diagnostics;
    }
    if (!args.export_prefix.empty()) {
        const std::string pa = args.export_prefix + "_a.s2p";
        const std::string pb = args.export_prefix + "_b.s2p";
        srmcal::export_error_boxes_s2p(res.model, pa, pb);
        outputs["box_a"] = pa;
        outputs["box_b"] = pb;
    }
    for (const std::string& w : res.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    write_run_manifest(args.out + ".manifest.json", "calibrate",
                       json{{"dir", args.dir}, {"mode", to_string(bundle.mode)}},
                       outputs, 0, "");
    std::cout << "calibrated " << res.model.size() << " frequency points ("
              << to_string(bundle.mode) << " mode) -> " << args.out << "\n";
    return 0;
}

struct apply_args {
    std::string model;
    std::string input;
    std::string output;
    std::string port = "left";
};

int cmd_apply(const apply_args& args) {
    const srmcal::error_model model = srmcal::load_error_model(args.model);
    const srmcal::frequency_network raw = srmcal::read_touchstone(args.input);
    srmcal::frequency_network out;
    if (raw.ports == 1 && args.port == "right") {
        if (!srmcal::grids_match(model.frequencies_hz, raw.frequencies_hz)) {
            throw srmcal::grid_mismatch("apply: '" + args.input +
                                        "' grid does not match the model");
        }
        out = raw;
        for (std::size_t fi = 0; fi < raw.size(); ++fi) {
            out.data[fi].s11 = srmcal::correct_reflection(
                model.terms[fi], raw.gamma(fi), srmcal::port_side::right);
        }
    } else {
        out = srmcal::apply_correction(model, raw);
    }
    srmcal::write_touchstone(out, args.output);
    std::cout << "corrected " << raw.size() << " points -> " << args.output
              << "\n";
    return 0;
}

struct compare_args {
    std::string a;
    std::string b;
    std::string out;
};

int cmd_compare(const compare_args& args) {
    const srmcal::frequency_network cal = srmcal::read_touchstone(args.a);
    const srmcal::frequency_network ref = srmcal::read_touchstone(args.b);
    const auto table = srmcal::error_metric(cal, ref);
    std::ofstream os(args.out);
    if (!os) {
        throw srmcal::data_error("cannot open '" + args.out + "' for writing");
    }
    const char* names[4] = {"s11", "s21", "s12", "s22"};
    os << "frequency,sparam,error_db\n";
    char buf[128];
    const std::size_t n_params = cal.ports == 1 ? 1 : 4;
    for (std::size_t p = 0; p < n_params; ++p) {
        for (std::size_t fi = 0; fi < cal.size(); ++fi) {
            std::snprintf(buf, sizeof(buf), "%.16g,%s,%.16g\n",
                          cal.frequencies_hz[fi], names[p], table[p][fi]);
            os << buf;
        }
    }
    std::cout << "error metric table -> " << args.out << "\n";
    return 0;
}

struct mc_args {
    std::string config;
    std::string out_dir;
    int runs = 200;
    std::vector<std::string> sources;
    std::int64_t seed = -1;
    int jobs = 1;
    bool percentile = false;
    bool no_budget = false;
};

int cmd_mc(const mc_args& args) {
    srmcal::mc_config cfg;
    cfg.kit = srmcal::load_kit_config(args.config);
    cfg.n_runs = args.runs;
    cfg.seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed)
                              : cfg.kit.perturbation.seed;
    cfg.percentile_bounds = args.percentile;
    cfg.include_budget = !args.no_budget;
    cfg.jobs = args.jobs;
    if (!args.sources.empty()) {
        cfg.sources = srmcal::no_sources;
        for (const std::string& s : args.sources) {
            cfg.sources |= srmcal::source_from_name(s);
        }
    }
    const srmcal::error_model boxes = resolve_boxes(cfg.kit, args.config);

    fs::create_directories(args.out_dir);
    const srmcal::mc_report report = srmcal::run_mc(cfg, boxes);
    const std::string csv = (fs::path(args.out_dir) / "mc_report.csv").string();
    const std::string js = (fs::path(args.out_dir) / "mc_summary.json").string();
    srmcal::write_mc_csv(report, csv);
    srmcal::write_mc_json_summary(report, js);
    write_run_manifest(
        (fs::path(args.out_dir) / "manifest.json").string(), "mc",
        json{{"config", args.config},
             {"runs", cfg.n_runs},
             {"sources", args.sources.empty() ? std::vector<std::string>{"all"}
                                              : args.sources}},
        json{{"csv", csv}, {"summary", js}}, cfg.seed, args.config);
    std::cout << "MC report (" << report.main.n_ok << "/" << cfg.n_runs
              << " runs ok) -> " << csv << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRM vector network analyzer calibration toolkit"};
    app.set_version_flag("--version", SRMCAL_VERSION);
    app.require_subcommand(1);

    int default_jobs = 1;
    if (const char* env = std::getenv("SRMCAL_JOBS")) {
        default_jobs = std::max(1, std::atoi(env));
    }

    simulate_args sim;
    CLI::App* c_sim =
        app.add_subcommand("simulate", "Generate a synthetic measurement set");
    c_sim->add_option("--config", sim.config, "Kit configuration JSON")
        ->required();
    c_sim->add_option("--out", sim.out_dir, "Output directory")->required();
    c_sim->add_option("--seed", sim.seed, "Override the perturbation seed");

    calibrate_args cal;
    CLI::App* c_cal =
        app.add_subcommand("calibrate", "Run the SRM calibration on a directory");
    c_cal->add_option("--dir", cal.dir, "Measurement directory (manifest or "
                                        "naming convention)")
        ->required();
    c_cal->add_option("--mode", cal.mode,
                      "thru, full-network, half-network or auto (manifest)");
    c_cal->add_option("--out", cal.out, "Error model JSON output");
    c_cal->add_option("--diagnostics", cal.diagnostics, "Diagnostics CSV output");
    c_cal->add_option("--export-boxes", cal.export_prefix,
                      "Also write <prefix>_a.s2p/<prefix>_b.s2p");
    c_cal->add_option("--match-def-left", cal.match_def_left,
                      "Override match definition (.s1p of true reflection)");
    c_cal->add_option("--match-def-right", cal.match_def_right,
                      "Override match definition (.s1p of true reflection)");
    c_cal->add_flag("--no-continuity", cal.no_continuity,
                    "Disable cross-frequency sign/order continuity");
    c_cal->add_flag("--non-reciprocal", cal.non_reciprocal,
                    "Declare the network standard non-reciprocal (flags k)");

    apply_args app_args;
    CLI::App* c_apply =
        app.add_subcommand("apply", "Apply an error model to a raw measurement");
    c_apply->add_option("--model", app_args.model, "Error model JSON")->required();
    c_apply->add_option("--input", app_args.input, "Raw .s1p/.s2p")->required();
    c_apply->add_option("--output", app_args.output, "Corrected output file")
        ->required();
    c_apply->add_option("--port", app_args.port,
                        "Port for one-port inputs: left or right");

    compare_args cmp;
    CLI::App* c_cmp = app.add_subcommand(
        "compare", "Error-vector magnitude between two networks");
    c_cmp->add_option("--a", cmp.a, "Calibrated network")->required();
    c_cmp->add_option("--b", cmp.b, "Reference network")->required();
    c_cmp->add_option("--out", cmp.out, "CSV output")->required();

    mc_args mc;
    CLI::App* c_mc =
        app.add_subcommand("mc", "Monte Carlo uncertainty campaign");
    c_mc->add_option("--config", mc.config, "Kit configuration JSON")->required();
    c_mc->add_option("--out", mc.out_dir, "Output directory")->required();
    c_mc->add_option("--runs", mc.runs, "Number of runs (default 200)");
    c_mc->add_option("--sources", mc.sources,
                     "Subset of noise,asymmetry,network,match,crosstalk "
                     "(default all)")
        ->delimiter(',');
    c_mc->add_option("--seed", mc.seed, "Base seed (default from config)");
    c_mc->add_option("--jobs", mc.jobs, "Parallel run workers")
        ->default_val(default_jobs);
    c_mc->add_flag("--percentile", mc.percentile,
                   "Percentile 95% bounds instead of 1.96 sigma");
    c_mc->add_flag("--no-budget", mc.no_budget,
                   "Skip the per-source budget sub-campaigns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim);
        if (c_cal->parsed()) return cmd_calibrate(cal);
        if (c_apply->parsed()) return cmd_apply(app_args);
        if (c_cmp->parsed()) return cmd_compare(cmp);
        if (c_mc->parsed()) return cmd_mc(mc);
    } catch (const srmcal::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const srmcal::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const srmcal::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const srmcal::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
