#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "srmcal/mc.hpp"
#include "srmcal/solr.hpp"
#include "srmcal/touchstone.hpp"
#include "srmcal/version.hpp"

namespace py = pybind11;
using namespace srmcal;

namespace {

using cmat = std::array<std::array<complex, 2>, 2>;

cmat to_nested(const matrix2& m) {
    return {{{m.e11, m.e12}, {m.e21, m.e22}}};
}

matrix2 from_nested(const cmat& m) {
    return {m[0][0], m[0][1], m[1][0], m[1][1]};
}

std::vector<complex> column(const frequency_network& net,
                            complex sparams::*field) {
    std::vector<complex> out;
    out.reserve(net.size());
    for (const sparams& s : net.data) out.push_back(s.*field);
    return out;
}

frequency_network net_from_columns(std::vector<double> freqs,
                                   const std::vector<complex>& s11,
                                   const std::vector<complex>& s21,
                                   const std::vector<complex>& s12,
                                   const std::vector<complex>& s22,
                                   complex z_ref) {
    if (s21.size() != s11.size() || s12.size() != s11.size() ||
        s22.size() != s11.size()) {
        throw data_error("two_port: column lengths differ");
    }
    std::vector<sparams> data(s11.size());
    for (std::size_t i = 0; i < s11.size(); ++i) {
        data[i] = {s11[i], s12[i], s21[i], s22[i]};
    }
    return make_two_port(std::move(freqs), std::move(data), z_ref);
}

std::vector<complex> term_column(const error_model& m,
                                 complex error_terms::*field) {
    std::vector<complex> out;
    out.reserve(m.size());
    for (const error_terms& t : m.terms) out.push_back(t.*field);
    return out;
}

} // namespace

PYBIND11_MODULE(_srmcal, m) {
    m.doc() = "SRM two-port VNA calibration core";
    m.attr("__version__") = SRMCAL_VERSION;

    // Exceptions map onto ValueError-ish python exceptions by category.
    py::register_exception<config_error>(m, "ConfigError");
    static py::exception<data_error> exc_data(m, "DataError");
    static py::exception<numerical_error> exc_num(m, "NumericalError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const config_error&) {
            throw; // handled by the registered exception above
        } catch (const numerical_error& e) {
            py::set_error(exc_num, e.what());
        } catch (const data_error& e) {
            py::set_error(exc_data, e.what());
        }
    });

    py::class_<frequency_network>(m, "Network")
        .def_readonly("frequencies_hz", &frequency_network::frequencies_hz)
        .def_readonly("ports", &frequency_network::ports)
        .def_readonly("reference_impedance",
                      &frequency_network::reference_impedance)
        .def_readwrite("label", &frequency_network::label)
        .def_property_readonly(
            "s11", [](const frequency_network& n) { return column(n, &sparams::s11); })
        .def_property_readonly(
            "s21", [](const frequency_network& n) { return column(n, &sparams::s21); })
        .def_property_readonly(
            "s12", [](const frequency_network& n) { return column(n, &sparams::s12); })
        .def_property_readonly(
            "s22", [](const frequency_network& n) { return column(n, &sparams::s22); })
        .def("__len__", &frequency_network::size)
        .def("__repr__", [](const frequency_network& n) {
            return "<srmcal.Network " + std::to_string(n.ports) + "-port, " +
                   std::to_string(n.size()) + " points>";
        });

    m.def("one_port", [](std::vector<double> f, std::vector<complex> g,
                         complex z_ref) {
              return make_one_port(std::move(f), std::move(g), z_ref);
          },
          py::arg("frequencies_hz"), py::arg("gamma"),
          py::arg("z_ref") = complex{50.0, 0.0});
    m.def("two_port", &net_from_columns, py::arg("frequencies_hz"),
          py::arg("s11"), py::arg("s21"), py::arg("s12"), py::arg("s22"),
          py::arg("z_ref") = complex{50.0, 0.0});

    m.def("read_touchstone", &read_touchstone, py::arg("path"));
    m.def("write_touchstone",
          [](const frequency_network& net, const std::string& path) {
              write_touchstone(net, path);
          },
          py::arg("network"), py::arg("path"));

    // 2x2 algebra on nested [[a, b], [c, d]] complex lists.
    m.def("s_to_t", [](complex s11, complex s21, complex s12, complex s22) {
              return to_nested(s_to_t(sparams{s11, s12, s21, s22}));
          },
          py::arg("s11"), py::arg("s21"), py::arg("s12"), py::arg("s22"));
    m.def("t_to_s", [](const cmat& t) {
              const sparams s = t_to_s(from_nested(t));
              return py::make_tuple(s.s11, s.s21, s.s12, s.s22);
          },
          py::arg("t"), "Returns (s11, s21, s12, s22)");
    m.def("cascade", [](const cmat& a, const cmat& b) {
              return to_nested(cascade(from_nested(a), from_nested(b)));
          });
    m.def("mobius_apply", [](const cmat& mm, complex z) {
              return mobius_apply(from_nested(mm), z);
          });

    py::class_<error_model>(m, "ErrorModel")
        .def_readonly("frequencies_hz", &error_model::frequencies_hz)
        .def_property_readonly(
            "a11", [](const error_model& e) { return term_column(e, &error_terms::a11); })
        .def_property_readonly(
            "a12", [](const error_model& e) { return term_column(e, &error_terms::a12); })
        .def_property_readonly(
            "a21", [](const error_model& e) { return term_column(e, &error_terms::a21); })
        .def_property_readonly(
            "b11", [](const error_model& e) { return term_column(e, &error_terms::b11); })
        .def_property_readonly(
            "b12", [](const error_model& e) { return term_column(e, &error_terms::b12); })
        .def_property_readonly(
            "b21", [](const error_model& e) { return term_column(e, &error_terms::b21); })
        .def_property_readonly(
            "k", [](const error_model& e) { return term_column(e, &error_terms::k); })
        .def("save", &save_error_model, py::arg("path"))
        .def("__len__", &error_model::size)
        .def("__repr__", [](const error_model& e) {
            return "<srmcal.ErrorModel " + std::to_string(e.size()) + " points>";
        });

    m.def("load_error_model", &load_error_model, py::arg("path"));
    m.def("fixture_error_model", &fixture_error_model, py::arg("frequencies_hz"));
    m.def("random_error_model", &random_error_model, py::arg("frequencies_hz"),
          py::arg("seed"));

    py::class_<calibration_result>(m, "CalibrationResult")
        .def_readonly("model", &calibration_result::model)
        .def_readonly("warnings", &calibration_result::warnings)
        .def_readonly("ambiguous", &calibration_result::ambiguous)
        .def_readonly("hypothesis_margin", &calibration_result::hypothesis_margin);

    m.def("simulate",
          [](const std::string& config_path, const std::string& out_dir,
             std::int64_t seed) {
              kit_config kit = load_kit_config(config_path);
              if (seed >= 0) {
                  kit.perturbation.seed = static_cast<std::uint64_t>(seed);
              }
              const error_model boxes =
                  kit.error_model_path.empty()
                      ? fixture_error_model(kit.frequencies_hz)
                      : load_error_model(kit.error_model_path);
              const synthetic_set set =
                  make_srm_set(kit, boxes, kit.perturbation, all_sources);
              return write_measurement_dir(set, kit, out_dir, config_path);
          },
          py::arg("config_path"), py::arg("out_dir"), py::arg("seed") = -1,
          "Generate a synthetic measurement directory; returns the file list");

    m.def("calibrate_dir",
          [](const std::string& dir, const std::string& mode, bool continuity,
             bool network_reciprocal) {
              measurement_bundle bundle = read_measurement_dir(dir);
              if (mode != "auto") bundle.mode = srm_mode_from_string(mode);
              bundle.meas.network_reciprocal = network_reciprocal;
              solve_options opts;
              opts.cross_frequency_continuity = continuity;
              return calibrate(bundle.meas, bundle.mode, opts);
          },
          py::arg("dir"), py::arg("mode") = "auto", py::arg("continuity") = true,
          py::arg("network_reciprocal") = true);

    m.def("apply_correction",
          [](const error_model& model, const frequency_network& raw) {
              return apply_correction(model, raw);
          },
          py::arg("model"), py::arg("raw"));

    m.def("error_metric_db",
          py::overload_cast<const complex&, const complex&>(&error_metric_db),
          py::arg("cal"), py::arg("ref"));
    m.def("error_metric",
          [](const frequency_network& cal, const frequency_network& ref) {
              return error_metric(cal, ref);
          },
          py::arg("cal"), py::arg("ref"),
          "Per-S-parameter, per-frequency dB error table");

    m.def("run_mc",
          [](const std::string& config_path, int runs,
             const std::vector<std::string>& sources, const std::string& out_dir,
             std::int64_t seed, int jobs, bool percentile, bool budget) {
              mc_config cfg;
              cfg.kit = load_kit_config(config_path);
              cfg.n_runs = runs;
              cfg.seed = seed >= 0 ? static_cast<std::uint64_t>(seed)
                                   : cfg.kit.perturbation.seed;
              cfg.jobs = jobs;
              cfg.percentile_bounds = percentile;
              cfg.include_budget = budget;
              if (!sources.empty()) {
                  cfg.sources = no_sources;
                  for (const std::string& s : sources) {
                      cfg.sources |= source_from_name(s);
                  }
              }
              const error_model boxes =
                  cfg.kit.error_model_path.empty()
                      ? fixture_error_model(cfg.kit.frequencies_hz)
                      : load_error_model(cfg.kit.error_model_path);
              const mc_report report = run_mc(cfg, boxes);
              if (!out_dir.empty()) {
                  std::filesystem::create_directories(out_dir);
                  write_mc_csv(report, out_dir + "/mc_report.csv");
                  write_mc_json_summary(report, out_dir + "/mc_summary.json");
              }
              py::dict out;
              out["runs_ok"] = report.main.n_ok;
              out["failed_runs"] = report.main.failed_runs;
              py::dict med;
              const char* names[4] = {"s11", "s21", "s12", "s22"};
              for (std::size_t p = 0; p < 4; ++p) {
                  med[names[p]] = median_spread(report.main, p);
              }
              out["median_std_mag"] = med;
              py::dict budget_out;
              for (const mc_campaign& c : report.budget) {
                  py::dict b;
                  for (std::size_t p = 0; p < 4; ++p) {
                      b[names[p]] = median_spread(c, p);
                  }
                  budget_out[c.source_label.c_str()] = b;
              }
              out["budget_median_std_mag"] = budget_out;
              return out;
          },
          py::arg("config_path"), py::arg("runs") = 200,
          py::arg("sources") = std::vector<std::string>{},
          py::arg("out_dir") = std::string{}, py::arg("seed") = -1,
          py::arg("jobs") = 1, py::arg("percentile") = false,
          py::arg("budget") = true);
}
