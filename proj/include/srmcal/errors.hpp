#ifndef SRMCAL_ERRORS_HPP
#define SRMCAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace srmcal {

// Base of all srmcal exceptions.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration or usage (CLI exit code 2).
class config_error : public error {
public:
    using error::error;
};

// Bad input data: parse failures, grid problems, I/O (CLI exit code 3).
class data_error : public error {
public:
    using error::error;
};

// Numerical failure during a solve (CLI exit code 4).
class numerical_error : public error {
public:
    using error::error;
};

class parse_error : public data_error {
public:
    parse_error(const std::string& file, long line, const std::string& msg)
        : data_error(file + ":" + std::to_string(line) + ": " + msg),
          line_number(line) {}
    long line_number;
};

class grid_error : public data_error {
public:
    using data_error::data_error;
};

class grid_mismatch : public data_error {
public:
    using data_error::data_error;
};

class non_transmissive : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class singular_conversion : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class singular_matrix : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class pole_input : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class rank_deficient : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class degenerate_eigen : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class normalization_failure : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class sign_undecidable : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class calibration_failure_rate : public numerical_error {
public:
    using numerical_error::numerical_error;
};

} // namespace srmcal

#endif
