#ifndef SRMCAL_NETWORK_HPP
#define SRMCAL_NETWORK_HPP

#include <string>
#include <vector>

#include "srmcal/complex2.hpp"

namespace srmcal {

// Frequency-indexed one- or two-port S-parameter record, the universal I/O
// currency. One-port data lives in s11; the other entries stay zero.
struct frequency_network {
    std::vector<double> frequencies_hz; // strictly increasing
    int ports = 2;                      // 1 or 2
    std::vector<sparams> data;          // one record per frequency
    complex reference_impedance{50.0, 0.0};
    std::string label; // file name or role, used in error messages

    std::size_t size() const { return frequencies_hz.size(); }

    const complex& gamma(std::size_t i) const { return data[i].s11; }
};

// Throws data_error / grid_error when the invariants do not hold.
void validate(const frequency_network& net);

frequency_network make_one_port(std::vector<double> frequencies_hz,
                                std::vector<complex> gammas,
                                complex z_ref = {50.0, 0.0},
                                std::string label = {});

frequency_network make_two_port(std::vector<double> frequencies_hz,
                                std::vector<sparams> data,
                                complex z_ref = {50.0, 0.0},
                                std::string label = {});

// All networks must share one frequency grid (1e-9 relative tolerance).
// No interpolation; mismatches are reported, never repaired.
void assert_common_grid(const std::vector<const frequency_network*>& nets,
                        double rel_tol = 1e-9);

bool grids_match(const std::vector<double>& a, const std::vector<double>& b,
                 double rel_tol = 1e-9);

std::vector<double> linspace(double start, double stop, std::size_t n);

} // namespace srmcal

#endif
