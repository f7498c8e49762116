#ifndef SRMCAL_VERSION_HPP
#define SRMCAL_VERSION_HPP

#define SRMCAL_VERSION "0.1.0"

#endif
