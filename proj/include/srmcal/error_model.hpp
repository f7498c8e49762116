#ifndef SRMCAL_ERROR_MODEL_HPP
#define SRMCAL_ERROR_MODEL_HPP

#include <string>
#include <vector>

#include "srmcal/network.hpp"

namespace srmcal {

// Seven error terms at one frequency. The error boxes are stored with their
// e22 entries normalized to exactly 1:
//   A = [[a11, a12], [a21, 1]],  B = [[b11, b12], [b21, 1]],  plus k.
struct error_terms {
    complex a11, a12, a21;
    complex b11, b12, b21;
    complex k;

    matrix2 a_matrix() const { return {a11, a12, a21, complex{1.0, 0.0}}; }
    matrix2 b_matrix() const { return {b11, b12, b21, complex{1.0, 0.0}}; }
};

struct error_model {
    std::vector<double> frequencies_hz;
    std::vector<error_terms> terms;

    std::size_t size() const { return frequencies_hz.size(); }
};

// Throws when sizes disagree, k = 0, or an error box is singular.
void validate(const error_model& model);

// JSON layout: {"format": "srmcal-error-model", "version": 1,
//   "frequencies_hz": [...], "terms": {"a11": [[re, im], ...], ...,
//   "k": [[re, im], ...]}}
std::string to_json_string(const error_model& model);
error_model error_model_from_json_string(const std::string& text);
void save_error_model(const error_model& model, const std::string& path);
error_model load_error_model(const std::string& path);

// Optional .s2p export of the boxes. k is folded into box A, i.e. the files
// hold S-parameters of (k*A) and B so that cascading file A, a DUT and
// file B reproduces the raw measurement model.
void export_error_boxes_s2p(const error_model& model,
                            const std::string& path_a,
                            const std::string& path_b);

} // namespace srmcal

#endif
