#include "srmcal/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace srmcal {

namespace {

constexpr double pi = 3.14159265358979323846;

std::string to_upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

double unit_scale(const std::string& upper_unit, const std::string& file,
                  long line) {
    if (upper_unit == "HZ") return 1.0;
    if (upper_unit == "KHZ") return 1e3;
    if (upper_unit == "MHZ") return 1e6;
    if (upper_unit == "GHZ") return 1e9;
    throw parse_error(file, line, "unknown frequency unit '" + upper_unit + "'");
}

complex pair_to_complex(double a, double b, touchstone_format fmt) {
    switch (fmt) {
    case touchstone_format::ri:
        return {a, b};
    case touchstone_format::ma:
        return std::polar(a, b * pi / 180.0);
    case touchstone_format::db:
        return std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0);
    }
    return {};
}

int ports_from_extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return 0;
    const std::string ext = to_upper(path.substr(dot));
    if (ext == ".S1P") return 1;
    if (ext == ".S2P") return 2;
    return 0;
}

// Strip comments and surrounding whitespace.
std::string clean_line(const std::string& raw) {
    std::string s = raw;
    const auto bang = s.find('!');
    if (bang != std::string::npos) s.erase(bang);
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

frequency_network read_touchstone_stream(std::istream& in,
                                         const std::string& name,
                                         int ports_hint) {
    double scale = 1e9; // Touchstone v1.1 defaults: GHz S MA R 50
    touchstone_format fmt = touchstone_format::ma;
    double z0 = 50.0;
    bool option_seen = false;
    int ports = ports_hint;

    frequency_network net;
    net.label = name;

    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = clean_line(raw);
        if (line.empty()) continue;

        if (line[0] == '[') {
            throw parse_error(name, line_no, "Touchstone 2.x keywords not supported");
        }

        if (line[0] == '#') {
            if (option_seen) {
                // v1.1 allows at most one option line before the data.
                throw parse_error(name, line_no, "duplicate option line");
            }
            option_seen = true;
            std::istringstream os(line.substr(1));
            std::string tok;
            while (os >> tok) {
                const std::string u = to_upper(tok);
                if (u == "HZ" || u == "KHZ" || u == "MHZ" || u == "GHZ") {
                    scale = unit_scale(u, name, line_no);
                } else if (u == "RI") {
                    fmt = touchstone_format::ri;
                } else if (u == "MA") {
                    fmt = touchstone_format::ma;
                } else if (u == "DB") {
                    fmt = touchstone_format::db;
                } else if (u == "S") {
                    // scattering parameters, the only supported kind
                } else if (u == "Y" || u == "Z" || u == "H" || u == "G") {
                    throw parse_error(name, line_no,
                                      tok + "-parameter files not supported");
                } else if (u == "R") {
                    if (!(os >> z0)) {
                        throw parse_error(name, line_no,
                                          "option line: missing value after R");
                    }
                } else {
                    throw parse_error(name, line_no,
                                      "unknown option token '" + tok + "'");
                }
            }
            continue;
        }

        // Data line.
        std::istringstream ds(line);
        std::vector<double> nums;
        double v = 0.0;
        while (ds >> v) nums.push_back(v);
        if (!ds.eof()) {
            throw parse_error(name, line_no, "malformed number in data line");
        }
        if (ports == 0) {
            if (nums.size() == 3) ports = 1;
            else if (nums.size() == 9) ports = 2;
            else
                throw parse_error(name, line_no,
                                  "cannot infer port count from " +
                                      std::to_string(nums.size()) + " columns");
        }
        const std::size_t expect = ports == 1 ? 3 : 9;
        if (nums.size() != expect) {
            throw parse_error(name, line_no,
                              "expected " + std::to_string(expect) +
                                  " columns, got " + std::to_string(nums.size()));
        }

        const double f_hz = nums[0] * scale;
        if (!net.frequencies_hz.empty() && f_hz <= net.frequencies_hz.back()) {
            throw grid_error(name + ":" + std::to_string(line_no) +
                             ": frequencies not strictly increasing");
        }
        net.frequencies_hz.push_back(f_hz);

        sparams sp;
        if (ports == 1) {
            sp.s11 = pair_to_complex(nums[1], nums[2], fmt);
        } else {
            // v1.1 two-port order: S11 S21 S12 S22
            sp.s11 = pair_to_complex(nums[1], nums[2], fmt);
            sp.s21 = pair_to_complex(nums[3], nums[4], fmt);
            sp.s12 = pair_to_complex(nums[5], nums[6], fmt);
            sp.s22 = pair_to_complex(nums[7], nums[8], fmt);
        }
        if (!sp.all_finite()) {
            throw parse_error(name, line_no, "non-finite S-parameter value");
        }
        net.data.push_back(sp);
    }

    if (net.frequencies_hz.empty()) {
        throw parse_error(name, line_no, "no data lines found");
    }
    net.ports = ports;
    net.reference_impedance = complex{z0, 0.0};
    validate(net);
    return net;
}

frequency_network read_touchstone(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open '" + path + "'");
    }
    return read_touchstone_stream(in, path, ports_from_extension(path));
}

void write_touchstone_stream(const frequency_network& net, std::ostream& out,
                             touchstone_format format,
                             const std::string& unit) {
    validate(net);
    const std::string uu = to_upper(unit);
    const double scale = unit_scale(uu, "<write>", 0);
    const char* fmt_name = format == touchstone_format::ri   ? "RI"
                           : format == touchstone_format::ma ? "MA"
                                                             : "DB";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), " %.16g", v);
        out << buf;
    };
    auto emit_pair = [&](const complex& c) {
        switch (format) {
        case touchstone_format::ri:
            emit(c.real());
            emit(c.imag());
            break;
        case touchstone_format::ma:
            emit(std::abs(c));
            emit(std::arg(c) * 180.0 / pi);
            break;
        case touchstone_format::db:
            emit(20.0 * std::log10(std::max(std::abs(c), 1e-300)));
            emit(std::arg(c) * 180.0 / pi);
            break;
        }
    };

    std::snprintf(buf, sizeof(buf), "%.16g", net.reference_impedance.real());
    out << "# " << uu << " S " << fmt_name << " R " << buf << "\n";
    for (std::size_t i = 0; i < net.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.16g", net.frequencies_hz[i] / scale);
        out << buf;
        const sparams& sp = net.data[i];
        if (net.ports == 1) {
            emit_pair(sp.s11);
        } else {
            emit_pair(sp.s11);
            emit_pair(sp.s21);
            emit_pair(sp.s12);
            emit_pair(sp.s22);
        }
        out << "\n";
    }
}

void write_touchstone(const frequency_network& net, const std::string& path,
                      touchstone_format format, const std::string& unit) {
    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open '" + path + "' for writing");
    }
    write_touchstone_stream(net, out, format, unit);
    if (!out) {
        throw data_error("write failed for '" + path + "'");
    }
}

} // namespace srmcal
