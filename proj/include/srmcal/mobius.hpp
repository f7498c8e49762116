#ifndef SRMCAL_MOBIUS_HPP
#define SRMCAL_MOBIUS_HPP

#include <vector>

#include "srmcal/linalg.hpp"

namespace srmcal {

// f(z) = (az + b)/(cz + d) represented by [[a, b], [c, d]], unique up to a
// nonzero complex scalar. Composition is the matrix product.

complex mobius_apply(const matrix2& m, const complex& z, double floor = 1e-30);

inline matrix2 mobius_compose(const matrix2& f1, const matrix2& f2) {
    return f1 * f2;
}

// Adjugate: the inverse transformation without the 1/det scaling, valid
// because coefficients are scale-free. det must still be nonzero.
matrix2 mobius_inverse(const matrix2& m, double det_floor = 1e-30);

// One measured reflection pair per load: (left-port value, right-port value).
struct reflection_pair {
    complex left;
    complex right;
};

struct cross_map_options {
    double min_load_separation = 0.01; // pairwise distance of left values
    double rank_tol = 1e-10;           // s3/s1 floor
};

struct cross_map_result {
    matrix2 h;                                // row-major from the nullspace
    double quality = 0.0;                     // s4/s3 rank-gap indicator
    double rank_gap = 0.0;                    // s3/s1
    std::array<double, 4> singular_values{};
};

// Least-squares estimate of the transformation with left = f(right):
// each pair contributes the row [-right, -1, right*left, left]. The
// solution is the right singular vector of the smallest singular value.
cross_map_result solve_cross_map(const std::vector<reflection_pair>& pairs,
                                 const cross_map_options& opts = {});

} // namespace srmcal

#endif
