#ifndef SRMCAL_TOUCHSTONE_HPP
#define SRMCAL_TOUCHSTONE_HPP

#include <iosfwd>
#include <string>

#include "srmcal/network.hpp"

namespace srmcal {

enum class touchstone_format { ri, ma, db };

// Touchstone v1.1 reader. Ports come from the .s1p/.s2p extension when
// present, otherwise from the column count of the first data line.
// Option line `# <unit> S <RI|MA|DB> R <z0>`; two-port data order
// S11 S21 S12 S22. Comment lines (!) are ignored.
frequency_network read_touchstone(const std::string& path);
frequency_network read_touchstone_stream(std::istream& in,
                                         const std::string& name,
                                         int ports_hint = 0);

// Writer emits RI by default at 16 significant digits; unit selects the
// option-line frequency scaling (Hz, kHz, MHz, GHz).
void write_touchstone(const frequency_network& net, const std::string& path,
                      touchstone_format format = touchstone_format::ri,
                      const std::string& unit = "Hz");
void write_touchstone_stream(const frequency_network& net, std::ostream& out,
                             touchstone_format format = touchstone_format::ri,
                             const std::string& unit = "Hz");

} // namespace srmcal

#endif
