#include "srmcal/error_model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srmcal/touchstone.hpp"

namespace srmcal {

using nlohmann::json;

void validate(const error_model& model) {
    if (model.terms.size() != model.frequencies_hz.size()) {
        throw data_error("error model: term count does not match grid");
    }
    for (std::size_t i = 0; i < model.size(); ++i) {
        const error_terms& t = model.terms[i];
        const char* bad = nullptr;
        if (!is_finite(t.a11) || !is_finite(t.a12) || !is_finite(t.a21) ||
            !is_finite(t.b11) || !is_finite(t.b12) || !is_finite(t.b21) ||
            !is_finite(t.k)) {
            bad = "non-finite term";
        } else if (std::abs(t.k) == 0.0) {
            bad = "k = 0";
        } else if (std::abs(t.a_matrix().det()) == 0.0) {
            bad = "singular A box";
        } else if (std::abs(t.b_matrix().det()) == 0.0) {
            bad = "singular B box";
        }
        if (bad) {
            throw data_error("error model: " + std::string(bad) +
                             " at frequency index " + std::to_string(i));
        }
    }
}

namespace {

json complex_list(const error_model& model, complex error_terms::*field) {
    json arr = json::array();
    for (const error_terms& t : model.terms) {
        arr.push_back({(t.*field).real(), (t.*field).imag()});
    }
    return arr;
}

void read_complex_list(const json& arr, error_model& model,
                       complex error_terms::*field, const char* name) {
    if (!arr.is_array() || arr.size() != model.terms.size()) {
        throw data_error(std::string("error model json: bad '") + name +
                         "' array");
    }
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
        const json& p = arr[i];
        if (!p.is_array() || p.size() != 2) {
            throw data_error(std::string("error model json: '") + name +
                             "' entries must be [re, im] pairs");
        }
        model.terms[i].*field = complex{p[0].get<double>(), p[1].get<double>()};
    }
}

} // namespace

std::string to_json_string(const error_model& model) {
    validate(model);
    json j;
    j["format"] = "srmcal-error-model";
    j["version"] = 1;
    j["frequencies_hz"] = model.frequencies_hz;
    j["terms"] = {
        {"a11", complex_list(model, &error_terms::a11)},
        {"a12", complex_list(model, &error_terms::a12)},
        {"a21", complex_list(model, &error_terms::a21)},
        {"b11", complex_list(model, &error_terms::b11)},
        {"b12", complex_list(model, &error_terms::b12)},
        {"b21", complex_list(model, &error_terms::b21)},
        {"k", complex_list(model, &error_terms::k)},
    };
    return j.dump(2);
}

error_model error_model_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw data_error(std::string("error model json: ") + e.what());
    }
    if (j.value("format", "") != "srmcal-error-model") {
        throw data_error("error model json: missing or wrong 'format' tag");
    }
    error_model model;
    model.frequencies_hz = j.at("frequencies_hz").get<std::vector<double>>();
    model.terms.resize(model.frequencies_hz.size());
    const json& t = j.at("terms");
    read_complex_list(t.at("a11"), model, &error_terms::a11, "a11");
    read_complex_list(t.at("a12"), model, &error_terms::a12, "a12");
    read_complex_list(t.at("a21"), model, &error_terms::a21, "a21");
    read_complex_list(t.at("b11"), model, &error_terms::b11, "b11");
    read_complex_list(t.at("b12"), model, &error_terms::b12, "b12");
    read_complex_list(t.at("b21"), model, &error_terms::b21, "b21");
    read_complex_list(t.at("k"), model, &error_terms::k, "k");
    validate(model);
    return model;
}

void save_error_model(const error_model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open '" + path + "' for writing");
    }
    out << to_json_string(model) << "\n";
}

error_model load_error_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return error_model_from_json_string(buf.str());
}

void export_error_boxes_s2p(const error_model& model, const std::string& path_a,
                            const std::string& path_b) {
    validate(model);
    std::vector<sparams> a_data, b_data;
    a_data.reserve(model.size());
    b_data.reserve(model.size());
    for (const error_terms& t : model.terms) {
        a_data.push_back(t_to_s(t.k * t.a_matrix()));
        b_data.push_back(t_to_s(t.b_matrix()));
    }
    write_touchstone(make_two_port(model.frequencies_hz, a_data, {50.0, 0.0},
                                   "error box A"),
                     path_a);
    write_touchstone(make_two_port(model.frequencies_hz, b_data, {50.0, 0.0},
                                   "error box B"),
                     path_b);
}

} // namespace srmcal
