#ifndef SRMCAL_SOLR_HPP
#define SRMCAL_SOLR_HPP

#include "srmcal/srm.hpp"

namespace srmcal {

// Fully defined one-port standard measured at both ports. The measured
// network is two-port shaped like the SRM load sweeps (s11 left reflection,
// s22 right reflection).
struct solr_standard {
    std::string name;
    frequency_network measured;
    std::vector<complex> defined_left;  // true reflection per frequency
    std::vector<complex> defined_right;
};

// Reference SOLR calibration: three (or more) fully defined one-port
// standards per port plus an unknown transmissive reciprocal two-port.
// One-port terms come from the same SVD-nullspace machinery as the SRM
// match solve, k from the determinant with the estimate-based sign.
calibration_result solr_calibrate(const std::vector<solr_standard>& standards,
                                  const frequency_network& reciprocal,
                                  const disambiguation_estimate& estimate,
                                  const solve_options& opts = {});

} // namespace srmcal

#endif
