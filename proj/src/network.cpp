#include "srmcal/network.hpp"

#include <cmath>

namespace srmcal {

void validate(const frequency_network& net) {
    const std::string who = net.label.empty() ? "network" : net.label;
    if (net.ports != 1 && net.ports != 2) {
        throw data_error(who + ": ports must be 1 or 2");
    }
    if (net.data.size() != net.frequencies_hz.size()) {
        throw data_error(who + ": data length does not match frequency count");
    }
    if (!is_finite(net.reference_impedance)) {
        throw data_error(who + ": non-finite reference impedance");
    }
    for (std::size_t i = 0; i < net.frequencies_hz.size(); ++i) {
        if (!std::isfinite(net.frequencies_hz[i])) {
            throw grid_error(who + ": non-finite frequency");
        }
        if (i > 0 && net.frequencies_hz[i] <= net.frequencies_hz[i - 1]) {
            throw grid_error(who + ": frequencies not strictly increasing at index " +
                             std::to_string(i));
        }
        if (!net.data[i].all_finite()) {
            throw data_error(who + ": non-finite S-parameter at index " +
                             std::to_string(i));
        }
    }
}

frequency_network make_one_port(std::vector<double> frequencies_hz,
                                std::vector<complex> gammas, complex z_ref,
                                std::string label) {
    frequency_network net;
    net.frequencies_hz = std::move(frequencies_hz);
    net.ports = 1;
    net.data.reserve(gammas.size());
    for (const complex& g : gammas) {
        net.data.push_back(sparams{g, 0.0, 0.0, 0.0});
    }
    net.reference_impedance = z_ref;
    net.label = std::move(label);
    validate(net);
    return net;
}

frequency_network make_two_port(std::vector<double> frequencies_hz,
                                std::vector<sparams> data, complex z_ref,
                                std::string label) {
    frequency_network net;
    net.frequencies_hz = std::move(frequencies_hz);
    net.ports = 2;
    net.data = std::move(data);
    net.reference_impedance = z_ref;
    net.label = std::move(label);
    validate(net);
    return net;
}

bool grids_match(const std::vector<double>& a, const std::vector<double>& b,
                 double rel_tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1.0});
        if (std::abs(a[i] - b[i]) > rel_tol * scale) return false;
    }
    return true;
}

void assert_common_grid(const std::vector<const frequency_network*>& nets,
                        double rel_tol) {
    if (nets.empty()) return;
    const frequency_network& ref = *nets.front();
    for (std::size_t n = 1; n < nets.size(); ++n) {
        const frequency_network& net = *nets[n];
        if (!grids_match(ref.frequencies_hz, net.frequencies_hz, rel_tol)) {
            const std::string a = ref.label.empty() ? "input 0" : ref.label;
            const std::string b =
                net.label.empty() ? "input " + std::to_string(n) : net.label;
            throw grid_mismatch("frequency grid of '" + b +
                                "' does not match '" + a + "'");
        }
    }
}

std::vector<double> linspace(double start, double stop, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = start + step * static_cast<double>(i);
    }
    out.back() = stop;
    return out;
}

} // namespace srmcal
