#ifndef SRMCAL_LINALG_HPP
#define SRMCAL_LINALG_HPP

#include <array>
#include <vector>

#include "srmcal/complex2.hpp"

namespace srmcal {

// Result of a nullspace solve on an Mx4 complex system (M >= 3).
struct nullspace_result {
    std::array<complex, 4> vector{};        // right singular vector of s4
    std::array<double, 4> singular_values{}; // descending, padded with 0 for M=3
    double quality = 0.0;                   // s4/s3, 0 means exact nullspace
    double rank_gap = 0.0;                  // s3/s1, small means rank < 3
};

// SVD of the stacked rows; relative accuracy of the singular subspace is
// what matters here, the row count stays tiny.
nullspace_result smallest_singular_vector(
    const std::vector<std::array<complex, 4>>& rows);

struct eigen2_result {
    complex lambda1, lambda2;
    // Unnormalized eigenvectors (first, second component).
    complex v1_first, v1_second;
    complex v2_first, v2_second;
};

// Closed-form eigendecomposition of a 2x2 complex matrix. Ordering is
// deterministic: lambda1 = (tr + sqrt(tr^2 - 4 det)) / 2 with the principal
// square root.
eigen2_result eigen2(const matrix2& m);

} // namespace srmcal

#endif
